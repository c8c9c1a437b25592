//! Dijkstra over the dense bounding box of a [`SafeRegion`].
//!
//! Every edge weight lies in `[1, 1.3]`, so tentative distances are kept in
//! a ring of three unit-width buckets: a vertex popped from bucket `b` has
//! distance in `[b, b+1)`, relaxing it lands in bucket `b+1` or `b+2`, and no
//! vertex of the current bucket can improve another one. Popping a bucket in
//! any order therefore settles exact distances, as a binary heap would.
//! Stale entries are skipped through the `settled` flag.

use crate::error::Result;
use crate::lattice::{EdgeId, Environment, Vertex};
use crate::padic::Level;
use crate::weights::passage_time_at_level;

use super::SafeRegion;

const NO_PRED: u8 = u8::MAX;

/// Neighbour directions in lexicographic order of the neighbour's `(x, y)`;
/// the index doubles as the tie-break rank of a predecessor.
const DIRS: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

struct Grid<'a> {
    env: &'a Environment,
    x0: i64,
    y0: i64,
    width: usize,
    height: usize,
    row_levels: Vec<Level>,
    col_levels: Vec<Level>,
    region: SafeRegion,
    radius: i64,
}

impl Grid<'_> {
    #[inline]
    fn index(&self, x: i64, y: i64) -> usize {
        (y - self.y0) as usize * self.width + (x - self.x0) as usize
    }

    #[inline]
    fn coords(&self, idx: usize) -> (i64, i64) {
        (
            self.x0 + (idx % self.width) as i64,
            self.y0 + (idx / self.width) as i64,
        )
    }

    #[inline]
    fn inside(&self, x: i64, y: i64) -> bool {
        let u = self.region.u;
        let v = self.region.v;
        (u.x - x).abs() + (u.y - y).abs() + (v.x - x).abs() + (v.y - y).abs() <= self.radius
    }

    /// Weight of the edge from `(x, y)` in direction `d`.
    #[inline]
    fn weight(&self, x: i64, y: i64, d: usize) -> f64 {
        let (dx, dy) = DIRS[d];
        let (e, level) = if dy == 0 {
            let ex = x.min(x + dx);
            (
                EdgeId::horizontal(ex, y),
                self.row_levels[(y - self.y0) as usize],
            )
        } else {
            let ey = y.min(y + dy);
            (
                EdgeId::vertical(x, ey),
                self.col_levels[(x - self.x0) as usize],
            )
        };
        passage_time_at_level(self.env, e, level).value()
    }
}

/// Vertices of the restricted shortest path and the number of settled
/// vertices, or `None` when `v` cannot be reached inside the region.
pub(super) fn shortest_path(
    env: &Environment,
    region: &SafeRegion,
) -> Result<Option<(Vec<Vertex>, u64)>> {
    let bbox = region.bounding_box();
    env.check_vertex(Vertex::new(bbox.x0, bbox.y0))?;
    env.check_vertex(Vertex::new(bbox.x1(), bbox.y1()))?;
    let width = bbox.width as usize + 1;
    let height = bbox.height as usize + 1;
    let row_levels = (bbox.y0..=bbox.y1())
        .map(|y| env.row_level(y))
        .collect::<Result<Vec<_>>>()?;
    let col_levels = (bbox.x0..=bbox.x1())
        .map(|x| env.col_level(x))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid {
        env,
        x0: bbox.x0,
        y0: bbox.y0,
        width,
        height,
        row_levels,
        col_levels,
        region: *region,
        radius: region.radius(),
    };
    if !grid.inside(region.u.x, region.u.y) || !grid.inside(region.v.x, region.v.y) {
        return Ok(None);
    }

    let cells = width * height;
    let mut dist = vec![f64::INFINITY; cells];
    let mut pred = vec![NO_PRED; cells];
    let mut settled = vec![false; cells];
    let mut buckets: [Vec<u32>; 3] = Default::default();

    let source = grid.index(region.u.x, region.u.y);
    let target = grid.index(region.v.x, region.v.y);
    dist[source] = 0.0;
    buckets[0].push(source as u32);
    let mut current = 0usize;
    let mut expanded = 0u64;

    'search: loop {
        let slot = current % 3;
        if buckets[slot].is_empty() {
            if buckets.iter().all(Vec::is_empty) {
                return Ok(None);
            }
            current += 1;
            continue;
        }
        let mut items = std::mem::take(&mut buckets[slot]);
        for &idx in &items {
            let idx = idx as usize;
            if settled[idx] {
                continue;
            }
            settled[idx] = true;
            expanded += 1;
            if idx == target {
                break 'search;
            }
            let (x, y) = grid.coords(idx);
            let base = dist[idx];
            for (d, &(dx, dy)) in DIRS.iter().enumerate() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < grid.x0
                    || ny < grid.y0
                    || nx >= grid.x0 + grid.width as i64
                    || ny >= grid.y0 + grid.height as i64
                    || !grid.inside(nx, ny)
                {
                    continue;
                }
                let n = grid.index(nx, ny);
                if settled[n] {
                    continue;
                }
                let nd = base + grid.weight(x, y, d);
                // Predecessor rank as seen from the neighbour: opposite direction.
                let rank = (3 - d) as u8;
                if nd < dist[n] {
                    let fresh = dist[n].is_infinite() || nd.floor() != dist[n].floor();
                    dist[n] = nd;
                    pred[n] = rank;
                    if fresh {
                        buckets[nd.floor() as usize % 3].push(n as u32);
                    }
                } else if nd == dist[n] && rank < pred[n] {
                    pred[n] = rank;
                }
            }
        }
        items.clear();
        buckets[slot] = items;
        current += 1;
    }

    let mut path = vec![region.v];
    let mut idx = target;
    while idx != source {
        let (x, y) = grid.coords(idx);
        let (dx, dy) = DIRS[pred[idx] as usize];
        let (px, py) = (x + dx, y + dy);
        path.push(Vertex::new(px, py));
        idx = grid.index(px, py);
    }
    path.reverse();
    Ok(Some((path, expanded)))
}
