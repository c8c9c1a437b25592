//! Exact passage-time distances and geodesics on the lazily generated lattice.
//!
//! A query `distance(u, v)` first builds a constructive path from `u` to `v`
//! ([`staircase_upper_bound`]); its time is a budget `B >= T(u, v)`. Since
//! every edge costs at least 1, a geodesic never leaves the l1-ellipse
//! `{w : |u - w|_1 + |w - v|_1 <= B}`, so an exact Dijkstra restricted to
//! that ellipse returns the true distance on the infinite lattice.

mod search;
mod staircase;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, Environment, Rect, Vertex};
use crate::weights::{path_edges, path_time};

pub use staircase::staircase_upper_bound;

/// Slack added to the constructive budget so the constructed path itself is
/// always inside the region.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Default cap on the number of cells in a search bounding box.
pub const DEFAULT_MEMORY_CAP: u64 = 50_000_000;

/// A lattice path with its passage time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    vertices: Vec<Vertex>,
    time: f64,
}

impl Path {
    pub fn new(env: &Environment, vertices: Vec<Vertex>) -> Result<Self> {
        let time = path_time(env, &vertices)?;
        Ok(Self { vertices, time })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        path_edges(&self.vertices).expect("paths are adjacency-checked on construction")
    }

    pub fn start(&self) -> Option<Vertex> {
        self.vertices.first().copied()
    }

    pub fn end(&self) -> Option<Vertex> {
        self.vertices.last().copied()
    }

    pub fn contains(&self, w: Vertex) -> bool {
        self.vertices.contains(&w)
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self {
            vertices,
            time: self.time,
        }
    }

    /// Recompute the cached time; true when it still matches.
    pub fn verify(&self, env: &Environment) -> bool {
        path_time(env, &self.vertices).is_ok_and(|t| t == self.time)
    }
}

/// The l1-ellipse that must contain every geodesic from `u` to `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeRegion {
    pub u: Vertex,
    pub v: Vertex,
    pub budget: f64,
}

impl SafeRegion {
    /// Largest admissible value of `|u - w|_1 + |w - v|_1`.
    pub fn radius(&self) -> i64 {
        self.budget.floor() as i64
    }

    pub fn contains(&self, w: Vertex) -> bool {
        self.u.l1(w) + w.l1(self.v) <= self.radius()
    }

    /// Smallest rectangle holding the region.
    pub fn bounding_box(&self) -> Rect {
        let half = (self.radius() - self.u.l1(self.v)).max(0) / 2;
        let x0 = self.u.x.min(self.v.x) - half;
        let y0 = self.u.y.min(self.v.y) - half;
        Rect {
            x0,
            y0,
            width: self.u.x.max(self.v.x) + half - x0,
            height: self.u.y.max(self.v.y) + half - y0,
        }
    }

    pub fn box_cells(&self) -> u64 {
        let b = self.bounding_box();
        (b.width as u64 + 1) * (b.height as u64 + 1)
    }

    /// Exact number of lattice points in the region.
    pub fn vertex_count(&self) -> u64 {
        let b = self.bounding_box();
        let mut count = 0u64;
        for x in b.x0..=b.x1() {
            // For fixed x the admissible y form an interval; count it directly.
            let lo = (b.y0..=b.y1()).find(|&y| self.contains(Vertex::new(x, y)));
            let hi = (b.y0..=b.y1()).rev().find(|&y| self.contains(Vertex::new(x, y)));
            if let (Some(lo), Some(hi)) = (lo, hi) {
                count += (hi - lo + 1) as u64;
            }
        }
        count
    }
}

/// Exact distance `T(u, v)`, the geodesic and search diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub time: f64,
    pub path: Path,
    /// Vertices settled by the search.
    pub expanded: u64,
    pub region_budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of bounding-box cells a search may allocate.
    pub memory_cap: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

pub fn safe_region(env: &Environment, u: Vertex, v: Vertex) -> Result<SafeRegion> {
    let upper = staircase_upper_bound(env, u, v)?;
    Ok(SafeRegion {
        u,
        v,
        budget: upper.time() + BUDGET_SLACK,
    })
}

pub fn distance(env: &Environment, u: Vertex, v: Vertex) -> Result<GeodesicResult> {
    distance_with(env, u, v, &SearchOptions::default())
}

pub fn distance_with(
    env: &Environment,
    u: Vertex,
    v: Vertex,
    opts: &SearchOptions,
) -> Result<GeodesicResult> {
    env.check_vertex(u)?;
    env.check_vertex(v)?;
    if u == v {
        return Ok(GeodesicResult {
            time: 0.0,
            path: Path::new(env, vec![u])?,
            expanded: 0,
            region_budget: 0.0,
        });
    }
    let region = safe_region(env, u, v)?;
    distance_in_region(env, &region, opts)
}

/// Dijkstra restricted to a given region. A region whose budget is below
/// `T(u, v)` yields the best path inside it, or [`Error::Unreachable`] if
/// none exists.
pub fn distance_in_region(
    env: &Environment,
    region: &SafeRegion,
    opts: &SearchOptions,
) -> Result<GeodesicResult> {
    let cells = region.box_cells();
    if cells > opts.memory_cap {
        return Err(Error::RegionTooLarge {
            budget: region.budget,
            cells,
            cap: opts.memory_cap,
        });
    }
    let found = search::shortest_path(env, region)?;
    let (vertices, expanded) = found.ok_or(Error::Unreachable {
        budget: region.budget,
    })?;
    let path = Path::new(env, vertices)?;
    Ok(GeodesicResult {
        time: path.time(),
        path,
        expanded,
        region_budget: region.budget,
    })
}

/// Shortest path restricted to `region`, or `None` if `v` is unreachable in it.
pub fn restricted_path(env: &Environment, region: &SafeRegion) -> Result<Option<Path>> {
    match search::shortest_path(env, region)? {
        Some((vertices, _)) => Ok(Some(Path::new(env, vertices)?)),
        None => Ok(None),
    }
}

pub fn geodesic(env: &Environment, u: Vertex, v: Vertex) -> Result<Path> {
    Ok(distance(env, u, v)?.path)
}

/// Largest Euclidean distance from a path vertex to the segment `[u, v]`.
pub fn wandering(u: Vertex, v: Vertex, path: &Path) -> f64 {
    wandering_of(u, v, path.vertices())
}

pub fn wandering_of(u: Vertex, v: Vertex, vertices: &[Vertex]) -> f64 {
    vertices
        .iter()
        .map(|&w| segment_distance(u, v, w))
        .fold(0.0, f64::max)
}

/// Distance from `w` to the segment `[u, v]`. The projection test and the
/// cross product are exact integers, so collinear points give exactly 0.
fn segment_distance(u: Vertex, v: Vertex, w: Vertex) -> f64 {
    let (dx, dy) = ((v.x - u.x) as i128, (v.y - u.y) as i128);
    let (wx, wy) = ((w.x - u.x) as i128, (w.y - u.y) as i128);
    let len2 = dx * dx + dy * dy;
    let dot = wx * dx + wy * dy;
    if len2 == 0 || dot <= 0 {
        (wx as f64).hypot(wy as f64)
    } else if dot >= len2 {
        ((wx - dx) as f64).hypot((wy - dy) as f64)
    } else {
        (wx * dy - wy * dx).abs() as f64 / (len2 as f64).sqrt()
    }
}
