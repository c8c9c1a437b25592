//! Independent shortest-path oracles on tiny windows.
//!
//! Neither oracle shares code with the Dijkstra search: edge weights come
//! straight from [`passage_time`], distances from Bellman-Ford relaxation to a
//! fixpoint, and on windows of at most 4x4 vertices from exhaustive
//! enumeration of simple paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, Environment, Vertex};
use crate::weights::passage_time;

pub const MAX_WINDOW: usize = 8;
pub const MAX_ENUMERATION_WINDOW: usize = 4;
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// `cols x rows` vertices with lower-left vertex `(x0, y0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: i64,
    pub y0: i64,
    pub cols: usize,
    pub rows: usize,
}

impl Window {
    pub fn new(x0: i64, y0: i64, cols: usize, rows: usize) -> Self {
        Self { x0, y0, cols, rows }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.x >= self.x0
            && v.y >= self.y0
            && v.x < self.x0 + self.cols as i64
            && v.y < self.y0 + self.rows as i64
    }

    /// Grow by `margin` vertices on every side.
    pub fn expanded(&self, margin: usize) -> Self {
        Self {
            x0: self.x0 - margin as i64,
            y0: self.y0 - margin as i64,
            cols: self.cols + 2 * margin,
            rows: self.rows + 2 * margin,
        }
    }

    fn index(&self, v: Vertex) -> usize {
        (v.y - self.y0) as usize * self.cols + (v.x - self.x0) as usize
    }

    fn vertex(&self, i: usize) -> Vertex {
        Vertex::new(
            self.x0 + (i % self.cols) as i64,
            self.y0 + (i / self.cols) as i64,
        )
    }

    /// Edges inside the window as `(a, b, t_e)` index triples.
    fn edges(&self, env: &Environment) -> Result<Vec<(usize, usize, f64)>> {
        let mut out = Vec::new();
        for i in 0..self.cols * self.rows {
            let a = self.vertex(i);
            for b in [Vertex::new(a.x + 1, a.y), Vertex::new(a.x, a.y + 1)] {
                if self.contains(b) {
                    let e = EdgeId::between(a, b).expect("unit step");
                    out.push((i, self.index(b), passage_time(env, e)?.value()));
                }
            }
        }
        Ok(out)
    }
}

fn check(window: &Window, u: Vertex, v: Vertex) -> Result<()> {
    if window.cols > MAX_WINDOW || window.rows > MAX_WINDOW {
        return Err(Error::WindowTooLarge {
            width: window.cols,
            height: window.rows,
        });
    }
    for p in [u, v] {
        if !window.contains(p) {
            return Err(Error::OutsideWindow(p));
        }
    }
    Ok(())
}

/// Bellman-Ford relaxation until nothing changes.
pub fn relaxation_distance(env: &Environment, window: &Window, u: Vertex, v: Vertex) -> Result<f64> {
    check(window, u, v)?;
    let edges = window.edges(env)?;
    let mut dist = vec![f64::INFINITY; window.cols * window.rows];
    dist[window.index(u)] = 0.0;
    loop {
        let mut changed = false;
        for &(a, b, t) in &edges {
            if dist[a] + t < dist[b] {
                dist[b] = dist[a] + t;
                changed = true;
            }
            if dist[b] + t < dist[a] {
                dist[a] = dist[b] + t;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(dist[window.index(v)])
}

/// Minimum over every simple path, by depth-first enumeration.
pub fn enumeration_distance(
    env: &Environment,
    window: &Window,
    u: Vertex,
    v: Vertex,
) -> Result<f64> {
    check(window, u, v)?;
    if window.cols > MAX_ENUMERATION_WINDOW || window.rows > MAX_ENUMERATION_WINDOW {
        return Err(Error::WindowTooLarge {
            width: window.cols,
            height: window.rows,
        });
    }
    let n = window.cols * window.rows;
    let mut adj = vec![Vec::new(); n];
    for (a, b, t) in window.edges(env)? {
        adj[a].push((b, t));
        adj[b].push((a, t));
    }
    fn dfs(
        at: usize,
        target: usize,
        acc: f64,
        adj: &[Vec<(usize, f64)>],
        seen: &mut [bool],
        best: &mut f64,
    ) {
        if at == target {
            *best = best.min(acc);
            return;
        }
        for &(next, t) in &adj[at] {
            if !seen[next] {
                seen[next] = true;
                dfs(next, target, acc + t, adj, seen, best);
                seen[next] = false;
            }
        }
    }
    let (s, t) = (window.index(u), window.index(v));
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut best = f64::INFINITY;
    dfs(s, t, 0.0, &adj, &mut seen, &mut best);
    Ok(best)
}

/// Shortest-path time from `u` to `v` using only vertices of `window`.
///
/// Windows of at most 4x4 vertices are solved twice, by relaxation and by
/// enumeration, and any disagreement is reported as an error.
pub fn brute_force_distance(
    env: &Environment,
    window: &Window,
    u: Vertex,
    v: Vertex,
) -> Result<f64> {
    let relaxed = relaxation_distance(env, window, u, v)?;
    if window.cols <= MAX_ENUMERATION_WINDOW && window.rows <= MAX_ENUMERATION_WINDOW {
        let enumerated = enumeration_distance(env, window, u, v)?;
        if (relaxed - enumerated).abs() > ORACLE_TOLERANCE {
            return Err(Error::OracleDisagreement {
                relaxation: relaxed,
                enumeration: enumerated,
            });
        }
    }
    Ok(relaxed)
}
