//! Mechanical checks of the structural lemmas on sampled instances.
//!
//! Each checker runs `trials` independent trials. Trial `t` draws its inputs
//! from a [`CounterRng`] keyed by the environment seed on a stream derived
//! from the lemma and `t`, so reports do not depend on scheduling. Trials run
//! in parallel and are merged in index order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{geodesic, Path};
use crate::lattice::{rectangle_multiplier, spacing, Axis, Environment, Rect, Vertex};
use crate::padic::Level;
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Square,
    Corner,
    Rectangle,
    #[serde(rename = "samevertex")]
    SameVertex,
    InfGeo,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::Square,
        Lemma::Corner,
        Lemma::Rectangle,
        Lemma::SameVertex,
        Lemma::InfGeo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Square => "square",
            Lemma::Corner => "corner",
            Lemma::Rectangle => "rectangle",
            Lemma::SameVertex => "samevertex",
            Lemma::InfGeo => "inf-geo",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown lemma {s:?}")))
    }
}

/// Outcome of one checker run.
///
/// `applicable` counts trials whose hypotheses held; violations are counted
/// among those. The witness is present iff `violations > 0` and replays the
/// first violating trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub k: Level,
    pub trials: u64,
    pub applicable: u64,
    pub violations: u64,
    pub witness_seed: Option<u64>,
    pub witness_coords: Option<Vec<Vertex>>,
    pub witness_path: Option<Vec<Vertex>>,
    pub statistics: BTreeMap<String, f64>,
}

impl LemmaReport {
    fn empty(lemma: Lemma, k: Level) -> Self {
        Self {
            lemma,
            k,
            trials: 0,
            applicable: 0,
            violations: 0,
            witness_seed: None,
            witness_coords: None,
            witness_path: None,
            statistics: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Combine reports of the same lemma from several environments, keeping
    /// the first witness. Statistics that are counts are summed; callers
    /// recompute rates afterwards.
    pub fn merge(&mut self, other: &LemmaReport) {
        debug_assert_eq!(self.lemma, other.lemma);
        self.trials += other.trials;
        self.applicable += other.applicable;
        self.violations += other.violations;
        if self.witness_seed.is_none() {
            self.witness_seed = other.witness_seed;
            self.witness_coords.clone_from(&other.witness_coords);
            self.witness_path.clone_from(&other.witness_path);
        }
        for (key, value) in &other.statistics {
            *self.statistics.entry(key.clone()).or_insert(0.0) += value;
        }
    }
}

enum Outcome {
    Skipped,
    Held,
    Violated { coords: Vec<Vertex>, path: Vec<Vertex> },
}

struct Trial {
    outcome: Outcome,
    counts: Vec<(&'static str, f64)>,
}

impl From<Outcome> for Trial {
    fn from(outcome: Outcome) -> Self {
        Trial {
            outcome,
            counts: Vec::new(),
        }
    }
}

fn run<F>(env: &Environment, lemma: Lemma, k: Level, trials: u64, trial: F) -> Result<LemmaReport>
where
    F: Fn(&mut CounterRng) -> Result<Trial> + Sync,
{
    let results: Vec<Result<Trial>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = CounterRng::new(env.seed(), (lemma.tag() << 40) ^ ((k as u64) << 32) ^ t);
            trial(&mut rng)
        })
        .collect();
    let mut report = LemmaReport::empty(lemma, k);
    report.trials = trials;
    for result in results {
        let result = result?;
        for (key, value) in result.counts {
            *report.statistics.entry(key.to_string()).or_insert(0.0) += value;
        }
        match result.outcome {
            Outcome::Skipped => {}
            Outcome::Held => report.applicable += 1,
            Outcome::Violated { coords, path } => {
                report.applicable += 1;
                report.violations += 1;
                if report.witness_seed.is_none() {
                    report.witness_seed = Some(env.seed());
                    report.witness_coords = Some(coords);
                    report.witness_path = Some(path);
                }
            }
        }
    }
    Ok(report)
}

fn verdict(ok: bool, coords: Vec<Vertex>, path: &Path) -> Outcome {
    if ok {
        Outcome::Held
    } else {
        Outcome::Violated {
            coords,
            path: path.vertices().to_vec(),
        }
    }
}

/// Half-width of the sampling window around the origin.
fn sampling_half_width(k: Level) -> Result<i64> {
    Ok(5 * spacing(k + 1)?)
}

fn sample_point(rng: &mut CounterRng, half: i64) -> Vertex {
    Vertex::new(rng.range_i64(-half, half), rng.range_i64(-half, half))
}

/// Two distinct boundary vertices of `rect`, uniform.
fn boundary_pair(rng: &mut CounterRng, rect: &Rect) -> (Vertex, Vertex) {
    let boundary = rect.boundary();
    let v = boundary[rng.index(boundary.len())];
    let mut w = v;
    while w == v {
        w = boundary[rng.index(boundary.len())];
    }
    (v, w)
}

fn all_in_grid(env: &Environment, path: &Path, k: Level) -> Result<bool> {
    for e in path.edges() {
        if !env.in_grid(e, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn on_rect_boundary(rect: &Rect, path: &Path) -> bool {
    path.edges().iter().all(|&e| rect.edge_on_boundary(e))
}

/// Geodesics between boundary vertices of a k-grid cell stay in the cell,
/// and stay on its boundary when the endpoints share a side or lie on
/// adjacent sides.
pub fn check_square_lemma(env: &Environment, k: Level, trials: u64) -> Result<LemmaReport> {
    let half = sampling_half_width(k)?;
    run(env, Lemma::Square, k, trials, |rng| {
        let cell = env.enclosing_square(sample_point(rng, half), k)?.rect();
        let (v, w) = boundary_pair(rng, &cell);
        let path = geodesic(env, v, w)?;
        let contained = path.vertices().iter().all(|&p| cell.contains(p));
        let confined = !cell.same_or_adjacent_sides(v, w) || on_rect_boundary(&cell, &path);
        Ok(verdict(contained && confined, vec![cell.corners()[2], v, w], &path).into())
    })
}

/// Geodesics between boundary vertices of a k-grid cell that visit one of
/// its corners run along the boundary.
///
/// Half of the trials pin one endpoint to a random corner so the hypothesis
/// is met often.
pub fn check_corner_corollary(env: &Environment, k: Level, trials: u64) -> Result<LemmaReport> {
    let half = sampling_half_width(k)?;
    run(env, Lemma::Corner, k, trials, |rng| {
        let cell = env.enclosing_square(sample_point(rng, half), k)?.rect();
        let (mut v, w) = boundary_pair(rng, &cell);
        if rng.next_u64() & 1 == 0 {
            let corners = cell.corners();
            let c = corners[rng.index(4)];
            if c != w {
                v = c;
            }
        }
        let path = geodesic(env, v, w)?;
        if !path.vertices().iter().any(|&p| cell.is_corner(p)) {
            return Ok(Outcome::Skipped.into());
        }
        Ok(verdict(on_rect_boundary(&cell, &path), vec![cell.corners()[2], v, w], &path).into())
    })
}

/// Geodesics that start on a short side of a `spacing(k) x M spacing(k)`
/// k-grid rectangle and stay inside it use only k-grid edges.
///
/// Half of the rectangles are transposed, tallied as `transposed`. Trials
/// whose geodesic leaves the rectangle are not applicable.
pub fn check_rectangle_lemma(env: &Environment, k: Level, trials: u64) -> Result<LemmaReport> {
    let half = sampling_half_width(k)?;
    let s = spacing(k)?;
    let long = s * rectangle_multiplier(env.alpha(), k) as i64;
    run(env, Lemma::Rectangle, k, trials, |rng| {
        let base = env.enclosing_square(sample_point(rng, half), k)?.lower_left;
        let transposed = rng.next_u64() & 1 == 1;
        let rect = if transposed {
            Rect { x0: base.x, y0: base.y, width: s, height: long }
        } else {
            Rect { x0: base.x, y0: base.y, width: long, height: s }
        };
        // Short sides: left/right when wide, bottom/top when tall.
        let far = rng.next_u64() & 1 == 1;
        let offset = rng.range_i64(0, s + 1);
        let v = match (transposed, far) {
            (false, false) => Vertex::new(rect.x0, rect.y0 + offset),
            (false, true) => Vertex::new(rect.x1(), rect.y0 + offset),
            (true, false) => Vertex::new(rect.x0 + offset, rect.y0),
            (true, true) => Vertex::new(rect.x0 + offset, rect.y1()),
        };
        let boundary = rect.boundary();
        let mut w = v;
        while w == v {
            w = boundary[rng.index(boundary.len())];
        }
        let path = geodesic(env, v, w)?;
        let mut trial: Trial = if path.vertices().iter().all(|&p| rect.contains(p)) {
            verdict(all_in_grid(env, &path, k)?, vec![base, v, w], &path).into()
        } else {
            Outcome::Skipped.into()
        };
        trial.counts.push(("transposed", transposed as u8 as f64));
        Ok(trial)
    })
}

/// A vertex on a k-grid line, uniform in the sampling window.
fn grid_vertex(env: &Environment, rng: &mut CounterRng, half: i64, k: Level) -> Result<Vertex> {
    let p = sample_point(rng, half);
    Ok(if rng.next_u64() & 1 == 0 {
        Vertex::new(env.next_line(Axis::Col, p.x, k, 1)?, p.y)
    } else {
        Vertex::new(p.x, env.next_line(Axis::Row, p.y, k, 1)?)
    })
}

/// A k-grid vertex at l1 distance at least `threshold` from `v`, in a random
/// direction. With `strict_quadrant` both coordinate offsets are nonzero.
fn far_grid_vertex(
    env: &Environment,
    rng: &mut CounterRng,
    v: Vertex,
    threshold: i64,
    k: Level,
    strict_quadrant: bool,
) -> Result<Vertex> {
    let s = spacing(k)?;
    loop {
        let reach = threshold + s + rng.range_i64(0, s);
        let dx = rng.range_i64(-reach, reach + 1);
        let rest = reach - dx.abs();
        let dy = if rng.next_u64() & 1 == 0 { rest } else { -rest };
        let p = Vertex::new(v.x + dx, v.y + dy);
        let w = if rng.next_u64() & 1 == 0 {
            Vertex::new(env.next_line(Axis::Col, p.x, k, dx.signum())?, p.y)
        } else {
            Vertex::new(p.x, env.next_line(Axis::Row, p.y, k, dy.signum())?)
        };
        if v.l1(w) >= threshold && (!strict_quadrant || (w.x != v.x && w.y != v.y)) {
            return Ok(w);
        }
    }
}

/// Geodesics between k-grid vertices at l1 distance at least
/// `spacing(k)^2 M` use only k-grid edges.
pub fn check_same_vertex(env: &Environment, k: Level, trials: u64) -> Result<LemmaReport> {
    let half = sampling_half_width(k)?;
    let s = spacing(k)?;
    let threshold = s * s * rectangle_multiplier(env.alpha(), k) as i64;
    run(env, Lemma::SameVertex, k, trials, |rng| {
        let v = grid_vertex(env, rng, half, k)?;
        let w = far_grid_vertex(env, rng, v, threshold, k, false)?;
        let path = geodesic(env, v, w)?;
        Ok(verdict(all_in_grid(env, &path, k)?, vec![v, w], &path).into())
    })
}

/// Quadrant index of `w` relative to `v` in corner order: 0 upper right,
/// 1 upper left, 2 lower left, 3 lower right.
pub fn quadrant(v: Vertex, w: Vertex) -> Option<usize> {
    match ((w.x - v.x).signum(), (w.y - v.y).signum()) {
        (1, 1) => Some(0),
        (-1, 1) => Some(1),
        (-1, -1) => Some(2),
        (1, -1) => Some(3),
        _ => None,
    }
}

/// Index of the last corner of `corners` visited by `path`.
pub fn last_corner(path: &[Vertex], corners: &[Vertex; 4]) -> Option<usize> {
    path.iter()
        .rev()
        .find_map(|p| corners.iter().position(|c| c == p))
}

/// Geodesics from `v` to k-grid vertices at l1 distance at least
/// `spacing(k)^3 M` pass through a corner of `V_k(v)`.
///
/// The statistic `quadrant_match` counts trials whose last visited corner
/// has the same index as the quadrant of the target.
pub fn check_corner_passage(env: &Environment, k: Level, trials: u64) -> Result<LemmaReport> {
    let half = sampling_half_width(k)?;
    let s = spacing(k)?;
    let threshold = s * s * s * rectangle_multiplier(env.alpha(), k) as i64;
    run(env, Lemma::InfGeo, k, trials, |rng| {
        let v = sample_point(rng, half);
        let w = far_grid_vertex(env, rng, v, threshold, k, true)?;
        let corners = env.enclosing_square(v, k)?.corners();
        let path = geodesic(env, v, w)?;
        let hit = last_corner(path.vertices(), &corners);
        let mut trial: Trial = verdict(hit.is_some(), vec![v, w], &path).into();
        let matched = hit.is_some() && hit == quadrant(v, w);
        trial.counts.push(("quadrant_match", matched as u8 as f64));
        Ok(trial)
    })
}

/// Dispatch by lemma.
pub fn check(env: &Environment, lemma: Lemma, k: Level, trials: u64) -> Result<LemmaReport> {
    match lemma {
        Lemma::Square => check_square_lemma(env, k, trials),
        Lemma::Corner => check_corner_corollary(env, k, trials),
        Lemma::Rectangle => check_rectangle_lemma(env, k, trials),
        Lemma::SameVertex => check_same_vertex(env, k, trials),
        Lemma::InfGeo => check_corner_passage(env, k, trials),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_names_round_trip() {
        for l in Lemma::ALL {
            assert_eq!(l.name().parse::<Lemma>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{}\"", l.name()));
        }
        assert!("squares".parse::<Lemma>().is_err());
    }

    #[test]
    fn grid_membership_rejects_a_finer_row() {
        let env = Environment::from_seed(0.1, 2).unwrap();
        let coarse = (0..50).find(|&y| env.row_level(y).unwrap() >= 2).unwrap();
        let fine = (0..50).find(|&y| env.row_level(y).unwrap() == 1).unwrap();
        let along = |y| {
            let vs = (0..4).map(|x| Vertex::new(x, y)).collect();
            Path::new(&env, vs).unwrap()
        };
        assert!(all_in_grid(&env, &along(coarse), 2).unwrap());
        assert!(!all_in_grid(&env, &along(fine), 2).unwrap());
        assert!(all_in_grid(&env, &along(fine), 1).unwrap());
    }

    #[test]
    fn quadrants_follow_corner_order() {
        let o = Vertex::ORIGIN;
        assert_eq!(quadrant(o, Vertex::new(3, 2)), Some(0));
        assert_eq!(quadrant(o, Vertex::new(-3, 2)), Some(1));
        assert_eq!(quadrant(o, Vertex::new(-3, -2)), Some(2));
        assert_eq!(quadrant(o, Vertex::new(3, -2)), Some(3));
        assert_eq!(quadrant(o, Vertex::new(3, 0)), None);
    }

    #[test]
    fn reports_are_deterministic() {
        let env = Environment::from_seed(0.1, 5).unwrap();
        let a = check_square_lemma(&env, 2, 20).unwrap();
        let b = check_square_lemma(&env, 2, 20).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert!(a.witness_seed.is_none());
    }

    #[test]
    fn far_vertices_respect_threshold() {
        let env = Environment::from_seed(0.1, 9).unwrap();
        let mut rng = CounterRng::new(1, 1);
        for _ in 0..200 {
            let v = grid_vertex(&env, &mut rng, 250, 2).unwrap();
            let w = far_grid_vertex(&env, &mut rng, v, 100, 2, true).unwrap();
            assert!(v.l1(w) >= 100);
            assert!(w.x != v.x && w.y != v.y);
            assert!(env.col_level(w.x).unwrap() >= 2 || env.row_level(w.y).unwrap() >= 2);
        }
    }
}
