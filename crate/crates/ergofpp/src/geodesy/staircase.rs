//! Constructive upper bounds on `T(u, v)`.
//!
//! From each endpoint the path climbs the grid hierarchy: at step `k` it moves
//! to the nearest k-grid column and row in the direction of the other endpoint
//! (first along the line it is on, then along the new line). Climbing on an
//! axis stops once the two climbers would cross on it. The two climbers are
//! then joined by an L-shaped path. When `u` and `v` share a row (or column)
//! the climb on that axis goes to one side, which gives the detour paths that
//! reach a fast row of the `l`-grid and come back.
//!
//! Every candidate over cap levels `1..=top` and detour sides is evaluated and
//! the fastest is returned. The cap-1 candidate is monotone, so the result
//! never exceeds `1.3 |u - v|_1`.

use crate::error::Result;
use crate::lattice::{spacing, Axis, EdgeId, Environment, Vertex};
use crate::padic::Level;
use crate::weights::passage_time;

use super::Path;

/// Highest level worth climbing to for a displacement of `extent`.
fn top_level(extent: i64) -> Level {
    let mut k = 1;
    while k < 27 && spacing(k).expect("k < 28") <= 2 * extent + 2 {
        k += 1;
    }
    k
}

/// Straight-line segment from `a` to `b` (sharing a row or a column),
/// excluding `a`.
fn push_straight(out: &mut Vec<Vertex>, a: Vertex, b: Vertex) {
    debug_assert!(a.x == b.x || a.y == b.y);
    let (sx, sy) = ((b.x - a.x).signum(), (b.y - a.y).signum());
    let mut p = a;
    while p != b {
        p = Vertex::new(p.x + sx, p.y + sy);
        out.push(p);
    }
}

fn l_path(a: Vertex, b: Vertex, horizontal_first: bool) -> Vec<Vertex> {
    let corner = if horizontal_first {
        Vertex::new(b.x, a.y)
    } else {
        Vertex::new(a.x, b.y)
    };
    let mut out = Vec::new();
    push_straight(&mut out, a, corner);
    push_straight(&mut out, corner, b);
    out
}

fn ordered_time(env: &Environment, start: Vertex, tail: &[Vertex]) -> Result<f64> {
    let mut prev = start;
    let mut total = 0.0;
    for &p in tail {
        let e = EdgeId::between(prev, p).expect("segments are unit steps");
        total += passage_time(env, e)?.value();
        prev = p;
    }
    Ok(total)
}

/// Append the cheaper of the two L-shaped connections from `a` to `b`.
fn push_cheaper_l(env: &Environment, out: &mut Vec<Vertex>, a: Vertex, b: Vertex) -> Result<()> {
    if a.x == b.x || a.y == b.y {
        push_straight(out, a, b);
        return Ok(());
    }
    let h = l_path(a, b, true);
    let v = l_path(a, b, false);
    if ordered_time(env, a, &v)? < ordered_time(env, a, &h)? {
        out.extend(v);
    } else {
        out.extend(h);
    }
    Ok(())
}

struct Climb {
    /// Direction of travel for the `u`-side climber per axis.
    dir_u: (i64, i64),
    /// Direction of travel for the `v`-side climber per axis.
    dir_v: (i64, i64),
    /// Whether the axis has nonzero displacement (climbers approach each other).
    approaching: (bool, bool),
}

fn candidate(
    env: &Environment,
    u: Vertex,
    v: Vertex,
    cap: Level,
    climb: &Climb,
) -> Result<Vec<Vertex>> {
    let (mut a, mut b) = (u, v);
    let mut side_u = vec![u];
    let mut side_v = vec![v];
    let (mut x_active, mut y_active) = (true, true);
    for k in 2..=cap {
        if x_active {
            let ax = env.next_line(Axis::Col, a.x, k, climb.dir_u.0)?;
            let bx = env.next_line(Axis::Col, b.x, k, climb.dir_v.0)?;
            if climb.approaching.0 && (bx - ax) * climb.dir_u.0 < 0 {
                x_active = false;
            } else {
                let (na, nb) = (Vertex::new(ax, a.y), Vertex::new(bx, b.y));
                push_straight(&mut side_u, a, na);
                push_straight(&mut side_v, b, nb);
                a = na;
                b = nb;
            }
        }
        if y_active {
            let ay = env.next_line(Axis::Row, a.y, k, climb.dir_u.1)?;
            let by = env.next_line(Axis::Row, b.y, k, climb.dir_v.1)?;
            if climb.approaching.1 && (by - ay) * climb.dir_u.1 < 0 {
                y_active = false;
            } else {
                let (na, nb) = (Vertex::new(a.x, ay), Vertex::new(b.x, by));
                push_straight(&mut side_u, a, na);
                push_straight(&mut side_v, b, nb);
                a = na;
                b = nb;
            }
        }
        if !x_active && !y_active {
            break;
        }
    }
    let mut path = side_u;
    push_cheaper_l(env, &mut path, a, b)?;
    side_v.pop();
    path.extend(side_v.into_iter().rev());
    Ok(path)
}

/// A valid path from `u` to `v` whose time bounds `T(u, v)` from above.
pub fn staircase_upper_bound(env: &Environment, u: Vertex, v: Vertex) -> Result<Path> {
    env.check_vertex(u)?;
    env.check_vertex(v)?;
    if u == v {
        return Path::new(env, vec![u]);
    }
    let (dx, dy) = ((v.x - u.x).signum(), (v.y - u.y).signum());
    let top = top_level(u.l1(v));
    let sides_x: &[i64] = if dx == 0 { &[1, -1] } else { &[0] };
    let sides_y: &[i64] = if dy == 0 { &[1, -1] } else { &[0] };

    let mut best: Option<Path> = None;
    for cap in 1..=top {
        for &sx in sides_x {
            for &sy in sides_y {
                let climb = Climb {
                    dir_u: (if dx == 0 { sx } else { dx }, if dy == 0 { sy } else { dy }),
                    dir_v: (if dx == 0 { sx } else { -dx }, if dy == 0 { sy } else { -dy }),
                    approaching: (dx != 0, dy != 0),
                };
                let vertices = candidate(env, u, v, cap, &climb)?;
                let path = Path::new(env, vertices)?;
                if best.as_ref().is_none_or(|b| path.time() < b.time()) {
                    best = Some(path);
                }
            }
        }
    }
    Ok(best.expect("at least one candidate"))
}
