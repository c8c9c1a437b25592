//! Passage times `t_e = 1 + alpha^k(e) + X_{k(e),e}`.
//!
//! The noise `X` is uniform on `[0, alpha^k (1 - alpha) / 1000)` and is drawn
//! from the keyed counter generator with counter `(x, y, orientation, level)`,
//! so any edge of the infinite lattice can be evaluated on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, Environment, Orientation, Vertex};
use crate::padic::Level;
use crate::rng::{keyed, unit_f64, Domain};

/// Upper bound on any passage time.
pub const MAX_PASSAGE_TIME: f64 = 1.3;

/// Passage time of one edge, stored as its excess over 1.
///
/// The excess `alpha^k + X` stays strictly positive even at levels where
/// `1 + alpha^k` rounds to `1.0` in double precision.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PassageTime {
    pub excess: f64,
}

impl PassageTime {
    pub fn value(self) -> f64 {
        1.0 + self.excess
    }
}

/// Width of the noise interval at level `k`.
#[inline]
pub fn noise_bound(alpha_pow_k: f64, alpha: f64) -> f64 {
    alpha_pow_k * (1.0 - alpha) / 1000.0
}

fn orientation_word(o: Orientation) -> u64 {
    match o {
        Orientation::Horizontal => 0,
        Orientation::Vertical => 1,
    }
}

/// `X_{k,e}` for edge `e` at level `k`.
pub fn noise(env: &Environment, e: EdgeId, k: Level) -> f64 {
    let bits = keyed(
        env.seed(),
        Domain::EdgeNoise,
        &[
            e.x as u64,
            e.y as u64,
            orientation_word(e.orientation),
            k as u64,
        ],
    );
    unit_f64(bits) * noise_bound(env.alpha().powi(k as i32), env.alpha())
}

/// Passage time of an edge whose level is already known.
#[inline]
pub fn passage_time_at_level(env: &Environment, e: EdgeId, k: Level) -> PassageTime {
    let a = env.alpha_pow(k);
    let bits = keyed(
        env.seed(),
        Domain::EdgeNoise,
        &[
            e.x as u64,
            e.y as u64,
            orientation_word(e.orientation),
            k as u64,
        ],
    );
    PassageTime {
        excess: a + unit_f64(bits) * noise_bound(a, env.alpha()),
    }
}

pub fn passage_time(env: &Environment, e: EdgeId) -> Result<PassageTime> {
    let k = env.edge_level(e)?;
    Ok(passage_time_at_level(env, e, k))
}

/// Edges of a vertex sequence; fails on the first non-adjacent pair.
pub fn path_edges(vertices: &[Vertex]) -> Result<Vec<EdgeId>> {
    vertices
        .windows(2)
        .map(|w| {
            EdgeId::between(w[0], w[1]).ok_or(Error::MalformedPath {
                from: w[0],
                to: w[1],
            })
        })
        .collect()
}

/// Sum of passage times in canonical order: edges sorted by id, so the result
/// depends only on the multiset of edges and not on traversal direction.
pub fn canonical_sum(env: &Environment, edges: &[EdgeId]) -> Result<f64> {
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    let mut total = 0.0;
    for e in sorted {
        total += passage_time(env, e)?.value();
    }
    Ok(total)
}

/// `Gamma(pi)`, the passage time of a path given by its vertices.
pub fn path_time(env: &Environment, vertices: &[Vertex]) -> Result<f64> {
    canonical_sum(env, &path_edges(vertices)?)
}
