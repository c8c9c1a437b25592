//! Lattice geometry driven by the odometer: edge levels, the nested j-grids
//! and the squares `V_k(v)`.
//!
//! Conventions used throughout the crate:
//!
//! * A horizontal edge on row `y` has level `L(sigma^y(omega_h))`, a vertical
//!   edge on column `x` has level `L(sigma^x(omega_v))`.
//! * Level `>= k` holds exactly when the first `k - 1` shifted digits vanish,
//!   so consecutive lines of the k-grid are [`spacing`]`(k) = 5^(k-1)` apart
//!   and every edge has level at least 1.
//! * `V_k(v)` is the k-grid cell `[X, X+s] x [Y, Y+s]` with `X <= x(v) < X+s`
//!   and `Y <= y(v) < Y+s`; a vertex on a grid line belongs to the cell to its
//!   right and/or above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{add_mod, level_of_shift, pow5, DigitSequence, Level, DEFAULT_PRECISION};
use crate::rng::{keyed, Domain};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct Vertex {
    pub x: i64,
    pub y: i64,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn l1(self, other: Vertex) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn is_adjacent(self, other: Vertex) -> bool {
        self.l1(other) == 1
    }

    /// Neighbours in lexicographic `(x, y)` order.
    pub fn neighbours(self) -> [Vertex; 4] {
        [
            Vertex::new(self.x - 1, self.y),
            Vertex::new(self.x, self.y - 1),
            Vertex::new(self.x, self.y + 1),
            Vertex::new(self.x + 1, self.y),
        ]
    }
}

impl From<(i64, i64)> for Vertex {
    fn from((x, y): (i64, i64)) -> Self {
        Vertex::new(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A lattice edge keyed by its lower/left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub x: i64,
    pub y: i64,
    pub orientation: Orientation,
}

impl EdgeId {
    pub const fn horizontal(x: i64, y: i64) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Horizontal,
        }
    }

    pub const fn vertical(x: i64, y: i64) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Vertical,
        }
    }

    /// The unique id of the edge joining `a` and `b`, if they are adjacent.
    pub fn between(a: Vertex, b: Vertex) -> Option<Self> {
        if !a.is_adjacent(b) {
            return None;
        }
        let lo = a.min(b);
        Some(if a.y == b.y {
            Self::horizontal(lo.x, lo.y)
        } else {
            Self::vertical(lo.x, lo.y)
        })
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        let a = Vertex::new(self.x, self.y);
        let b = match self.orientation {
            Orientation::Horizontal => Vertex::new(self.x + 1, self.y),
            Orientation::Vertical => Vertex::new(self.x, self.y + 1),
        };
        (a, b)
    }
}

/// Which family of grid lines: rows carry horizontal edges, columns vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Row,
    Col,
}

/// Distance between consecutive lines of the k-grid, `5^(k-1)`.
pub fn spacing(k: Level) -> Result<i64> {
    if k == 0 {
        return Err(Error::InvalidLevel(k));
    }
    5i64.checked_pow(k - 1).ok_or(Error::SpacingOverflow(k))
}

/// Smallest integer `M` with `alpha^k * M > 1`.
///
/// `alpha^k` is inflated by floating point for decimal alphas (`0.1^2` is
/// slightly above `0.01`), so the reciprocal is nudged by `1e-9` before
/// flooring; this recovers `M = 10^k + 1` for `alpha = 0.1`.
pub fn rectangle_multiplier(alpha: f64, k: Level) -> u64 {
    let recip = 1.0 / alpha.powi(k as i32);
    (recip + 1e-9).floor() as u64 + 1
}

/// One sample of the environment: `alpha`, the two digit sequences and the
/// seed keying the edge noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    alpha: f64,
    omega_h: DigitSequence,
    omega_v: DigitSequence,
    seed: u64,
    value_h: u128,
    value_v: u128,
    guard: i64,
    guard_exponent: usize,
    alpha_pow: Vec<f64>,
}

pub fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.2 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

impl Environment {
    pub fn new(
        alpha: f64,
        omega_h: DigitSequence,
        omega_v: DigitSequence,
        seed: u64,
    ) -> Result<Self> {
        validate_alpha(alpha)?;
        let precision = omega_h.precision();
        if omega_v.precision() != precision {
            return Err(Error::InvalidPrecision {
                got: omega_v.precision(),
                min: precision,
                max: precision,
            });
        }
        let guard_exponent = precision - 8;
        let guard = pow5(guard_exponent).min(i64::MAX as u128) as i64;
        let alpha_pow = (0..=precision as i32 + 1).map(|k| alpha.powi(k)).collect();
        Ok(Self {
            alpha,
            value_h: omega_h.value(),
            value_v: omega_v.value(),
            omega_h,
            omega_v,
            seed,
            guard,
            guard_exponent,
            alpha_pow,
        })
    }

    /// Draw both digit sequences from `seed` at the default precision.
    pub fn from_seed(alpha: f64, seed: u64) -> Result<Self> {
        Self::from_seed_with_precision(alpha, seed, DEFAULT_PRECISION)
    }

    pub fn from_seed_with_precision(alpha: f64, seed: u64, precision: usize) -> Result<Self> {
        let draw = |domain: Domain| {
            let digits = (0..precision as u64)
                .map(|i| ((keyed(seed, domain, &[i]) as u128 * 5) >> 64) as u8)
                .collect();
            DigitSequence::new(digits)
        };
        Self::new(
            alpha,
            draw(Domain::HorizontalDigits)?,
            draw(Domain::VerticalDigits)?,
            seed,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn precision(&self) -> usize {
        self.omega_h.precision()
    }

    pub fn omega_h(&self) -> &DigitSequence {
        &self.omega_h
    }

    pub fn omega_v(&self) -> &DigitSequence {
        &self.omega_v
    }

    /// `alpha^k` from a precomputed table.
    #[inline]
    pub fn alpha_pow(&self, k: Level) -> f64 {
        self.alpha_pow[k as usize]
    }

    /// Largest coordinate magnitude accepted by level queries.
    pub fn coordinate_guard(&self) -> i64 {
        self.guard
    }

    pub fn check_coord(&self, c: i64) -> Result<()> {
        if c.unsigned_abs() <= self.guard as u64 {
            Ok(())
        } else {
            Err(Error::Precision {
                coord: c,
                exponent: self.guard_exponent,
            })
        }
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        self.check_coord(v.x)?;
        self.check_coord(v.y)
    }

    /// Level shared by every horizontal edge on row `y`.
    pub fn row_level(&self, y: i64) -> Result<Level> {
        self.check_coord(y)?;
        Ok(level_of_shift(self.value_h, y, self.precision()))
    }

    /// Level shared by every vertical edge on column `x`.
    pub fn col_level(&self, x: i64) -> Result<Level> {
        self.check_coord(x)?;
        Ok(level_of_shift(self.value_v, x, self.precision()))
    }

    pub fn line_level(&self, axis: Axis, coord: i64) -> Result<Level> {
        match axis {
            Axis::Row => self.row_level(coord),
            Axis::Col => self.col_level(coord),
        }
    }

    pub fn edge_level(&self, e: EdgeId) -> Result<Level> {
        match e.orientation {
            Orientation::Horizontal => {
                self.check_coord(e.x)?;
                self.row_level(e.y)
            }
            Orientation::Vertical => {
                self.check_coord(e.y)?;
                self.col_level(e.x)
            }
        }
    }

    /// Nearest line of the k-grid at or beyond `coord` in direction `dir`
    /// (`dir >= 0` searches upward, `dir < 0` downward).
    pub fn next_line(&self, axis: Axis, coord: i64, k: Level, dir: i64) -> Result<i64> {
        self.check_coord(coord)?;
        let s = spacing(k)?;
        let value = match axis {
            Axis::Row => self.value_h,
            Axis::Col => self.value_v,
        };
        let r = add_mod(value % s as u128, coord, s as u128) as i64;
        let line = if dir >= 0 {
            coord.checked_add((s - r) % s)
        } else {
            coord.checked_sub(r)
        };
        let line = line.ok_or(Error::SpacingOverflow(k))?;
        self.check_coord(line)?;
        Ok(line)
    }

    /// All rows (or columns) in `[lo, hi]` belonging to the k-grid.
    pub fn grid_lines(&self, k: Level, lo: i64, hi: i64, axis: Axis) -> Result<Vec<i64>> {
        if lo > hi {
            return Err(Error::EmptyRange { lo, hi });
        }
        self.check_coord(hi)?;
        let s = spacing(k)?;
        let mut out = Vec::new();
        let mut line = self.next_line(axis, lo, k, 1)?;
        while line <= hi {
            out.push(line);
            match line.checked_add(s) {
                Some(next) => line = next,
                None => break,
            }
        }
        Ok(out)
    }

    /// The square `V_k(v)`.
    pub fn enclosing_square(&self, v: Vertex, k: Level) -> Result<GridSquare> {
        let side = spacing(k)?;
        let x = self.next_line(Axis::Col, v.x, k, -1)?;
        let y = self.next_line(Axis::Row, v.y, k, -1)?;
        Ok(GridSquare {
            k,
            lower_left: Vertex::new(x, y),
            side,
        })
    }

    /// Whether edge `e` belongs to the k-grid.
    pub fn in_grid(&self, e: EdgeId, k: Level) -> Result<bool> {
        Ok(self.edge_level(e)? >= k)
    }
}

/// Closed axis-parallel rectangle `[x0, x0+width] x [y0, y0+height]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub width: i64,
    pub height: i64,
}

/// Sides of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Left,
    Bottom,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl Rect {
    pub fn x1(&self) -> i64 {
        self.x0 + self.width
    }

    pub fn y1(&self) -> i64 {
        self.y0 + self.height
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (self.x0..=self.x1()).contains(&v.x) && (self.y0..=self.y1()).contains(&v.y)
    }

    pub fn sides_of(&self, v: Vertex) -> Vec<Side> {
        if !self.contains(v) {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(2);
        if v.y == self.y1() {
            out.push(Side::Top);
        }
        if v.x == self.x0 {
            out.push(Side::Left);
        }
        if v.y == self.y0 {
            out.push(Side::Bottom);
        }
        if v.x == self.x1() {
            out.push(Side::Right);
        }
        out
    }

    pub fn on_boundary(&self, v: Vertex) -> bool {
        !self.sides_of(v).is_empty()
    }

    /// An edge lies on the boundary when both endpoints share a side.
    pub fn edge_on_boundary(&self, e: EdgeId) -> bool {
        let (a, b) = e.endpoints();
        let sa = self.sides_of(a);
        self.sides_of(b).iter().any(|s| sa.contains(s))
    }

    /// Corners starting at the upper right, counterclockwise.
    pub fn corners(&self) -> [Vertex; 4] {
        [
            Vertex::new(self.x1(), self.y1()),
            Vertex::new(self.x0, self.y1()),
            Vertex::new(self.x0, self.y0),
            Vertex::new(self.x1(), self.y0),
        ]
    }

    pub fn is_corner(&self, v: Vertex) -> bool {
        self.corners().contains(&v)
    }

    /// Boundary vertices, counterclockwise from the lower-left corner.
    pub fn boundary(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(2 * (self.width + self.height) as usize);
        for x in self.x0..self.x1() {
            out.push(Vertex::new(x, self.y0));
        }
        for y in self.y0..self.y1() {
            out.push(Vertex::new(self.x1(), y));
        }
        for x in (self.x0 + 1..=self.x1()).rev() {
            out.push(Vertex::new(x, self.y1()));
        }
        for y in (self.y0 + 1..=self.y1()).rev() {
            out.push(Vertex::new(self.x0, y));
        }
        out
    }

    /// Whether `v` and `w` lie on the same side or on adjacent sides.
    pub fn same_or_adjacent_sides(&self, v: Vertex, w: Vertex) -> bool {
        let sv = self.sides_of(v);
        let sw = self.sides_of(w);
        sv.iter()
            .any(|a| sw.iter().any(|&b| b != a.opposite()))
    }
}

/// A k-grid cell, e.g. `V_k(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSquare {
    pub k: Level,
    pub lower_left: Vertex,
    pub side: i64,
}

impl GridSquare {
    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.lower_left.x,
            y0: self.lower_left.y,
            width: self.side,
            height: self.side,
        }
    }

    /// `v_1..v_4`: upper right first, then counterclockwise.
    pub fn corners(&self) -> [Vertex; 4] {
        self.rect().corners()
    }

    /// Offset of `v` from the lower-left corner.
    pub fn offset_of(&self, v: Vertex) -> (i64, i64) {
        (v.x - self.lower_left.x, v.y - self.lower_left.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env_with(h: &[u8], v: &[u8]) -> Environment {
        Environment::new(
            0.1,
            DigitSequence::from_prefix(h, DEFAULT_PRECISION).unwrap(),
            DigitSequence::from_prefix(v, DEFAULT_PRECISION).unwrap(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn alpha_validation() {
        assert!(Environment::from_seed(0.0, 1).is_err());
        assert!(Environment::from_seed(0.2, 1).is_err());
        assert!(Environment::from_seed(-0.1, 1).is_err());
        assert!(Environment::from_seed(0.1999, 1).is_ok());
    }

    #[test]
    fn edge_level_examples() {
        let env = env_with(&[2, 1], &[1]);
        assert_eq!(env.edge_level(EdgeId::horizontal(0, 0)).unwrap(), 1);

        let env = env_with(&[0, 1], &[1]);
        assert_eq!(env.edge_level(EdgeId::horizontal(0, 0)).unwrap(), 2);
        assert_eq!(env.edge_level(EdgeId::horizontal(0, 1)).unwrap(), 1);
        assert_eq!(
            env.edge_level(EdgeId::horizontal(-7, 3)).unwrap(),
            env.edge_level(EdgeId::horizontal(12, 3)).unwrap()
        );
    }

    #[test]
    fn precision_guard() {
        let env = Environment::from_seed_with_precision(0.1, 3, 32).unwrap();
        let g = env.coordinate_guard();
        assert_eq!(g as u128, 5u128.pow(24));
        assert!(env.row_level(g).is_ok());
        assert!(matches!(
            env.row_level(g + 1),
            Err(Error::Precision { exponent: 24, .. })
        ));
        assert!(env.edge_level(EdgeId::vertical(0, -g - 1)).is_err());
    }

    #[test]
    fn spacing_values() {
        assert_eq!(spacing(1).unwrap(), 1);
        assert_eq!(spacing(2).unwrap(), 5);
        assert_eq!(spacing(4).unwrap(), 125);
        assert!(spacing(0).is_err());
        assert!(spacing(28).is_ok());
        assert!(matches!(spacing(29), Err(Error::SpacingOverflow(29))));
    }

    #[test]
    fn spacing_matches_enumeration() {
        // Rows y in [0, 5^(k)) with level >= k, found by scanning single edges.
        for seed in 0..20 {
            let env = Environment::from_seed(0.1, seed).unwrap();
            for (k, window) in [(2u32, 25i64), (3, 125), (4, 625)] {
                let rows: Vec<i64> = (0..window)
                    .filter(|&y| env.edge_level(EdgeId::horizontal(0, y)).unwrap() >= k)
                    .collect();
                assert_eq!(rows.len() as i64, window / spacing(k).unwrap());
                for pair in rows.windows(2) {
                    assert_eq!(pair[1] - pair[0], spacing(k).unwrap());
                }
                // Exactly the rows with omega_h + y divisible by 5^(k-1).
                let s = spacing(k).unwrap() as u128;
                let base = env.omega_h().value() % s;
                for &y in &rows {
                    assert_eq!((base + y as u128) % s, 0);
                }
            }
        }
    }

    #[test]
    fn grid_lines_examples() {
        let env = Environment::from_seed(0.1, 11).unwrap();
        assert_eq!(
            env.grid_lines(1, 0, 9, Axis::Row).unwrap(),
            (0..=9).collect::<Vec<_>>()
        );
        assert_eq!(env.grid_lines(2, 0, 24, Axis::Col).unwrap().len(), 5);
        let scan: Vec<i64> = (-200..=200)
            .filter(|&x| env.col_level(x).unwrap() >= 3)
            .collect();
        assert_eq!(env.grid_lines(3, -200, 200, Axis::Col).unwrap(), scan);
        assert!(env.grid_lines(2, 5, 4, Axis::Row).is_err());
    }

    #[test]
    fn nested_grids() {
        let env = Environment::from_seed(0.1, 5).unwrap();
        for k in 1..5 {
            let coarse = env.grid_lines(k + 1, -700, 700, Axis::Row).unwrap();
            let fine = env.grid_lines(k, -700, 700, Axis::Row).unwrap();
            assert!(coarse.iter().all(|y| fine.contains(y)));
        }
    }

    #[test]
    fn enclosing_square_interior_and_ties() {
        // omega digits zero: k-grid lines are multiples of 5^(k-1).
        let env = env_with(&[], &[]);
        let sq = env.enclosing_square(Vertex::new(7, 3), 2).unwrap();
        assert_eq!(sq.lower_left, Vertex::new(5, 0));
        assert_eq!(sq.side, 5);
        // On a grid column: the cell to the right.
        let sq = env.enclosing_square(Vertex::new(5, 3), 2).unwrap();
        assert_eq!(sq.lower_left, Vertex::new(5, 0));
        // On a grid row: the cell above.
        let sq = env.enclosing_square(Vertex::new(6, 5), 2).unwrap();
        assert_eq!(sq.lower_left, Vertex::new(5, 5));
        // Negative coordinates.
        let sq = env.enclosing_square(Vertex::new(-1, -6), 2).unwrap();
        assert_eq!(sq.lower_left, Vertex::new(-5, -10));
        assert_eq!(
            sq.corners(),
            [
                Vertex::new(0, -5),
                Vertex::new(-5, -5),
                Vertex::new(-5, -10),
                Vertex::new(0, -10)
            ]
        );
    }

    #[test]
    fn enclosing_square_boundary_in_grid() {
        for seed in 0..10 {
            let env = Environment::from_seed(0.1, seed).unwrap();
            for k in 1..5 {
                let sq = env.enclosing_square(Vertex::new(3, -4), k).unwrap();
                let r = sq.rect();
                assert!(r.contains(Vertex::new(3, -4)));
                assert!(3 < r.x1() && -4 < r.y1());
                assert!(env.row_level(r.y0).unwrap() >= k);
                assert!(env.row_level(r.y1()).unwrap() >= k);
                assert!(env.col_level(r.x0).unwrap() >= k);
                assert!(env.col_level(r.x1()).unwrap() >= k);
                // Interior lines are strictly below level k.
                for y in r.y0 + 1..r.y1() {
                    assert!(env.row_level(y).unwrap() < k);
                }
            }
        }
    }

    #[test]
    fn rectangle_multiplier_values() {
        assert_eq!(rectangle_multiplier(0.1, 1), 11);
        assert_eq!(rectangle_multiplier(0.1, 2), 101);
        assert_eq!(rectangle_multiplier(0.15, 1), 7);
    }

    #[test]
    fn edge_canonicalisation() {
        let a = Vertex::new(2, 3);
        let b = Vertex::new(3, 3);
        assert_eq!(EdgeId::between(a, b), EdgeId::between(b, a));
        assert_eq!(EdgeId::between(a, b).unwrap().endpoints(), (a, b));
        let c = Vertex::new(2, 2);
        assert_eq!(EdgeId::between(a, c), Some(EdgeId::vertical(2, 2)));
        assert_eq!(EdgeId::between(a, Vertex::new(3, 4)), None);
    }

    #[test]
    fn rect_sides() {
        let r = Rect {
            x0: 0,
            y0: 0,
            width: 5,
            height: 5,
        };
        assert_eq!(r.boundary().len(), 20);
        assert!(r.same_or_adjacent_sides(Vertex::new(0, 2), Vertex::new(0, 4)));
        assert!(r.same_or_adjacent_sides(Vertex::new(0, 2), Vertex::new(3, 5)));
        assert!(!r.same_or_adjacent_sides(Vertex::new(0, 2), Vertex::new(5, 3)));
        // A right-hand corner touches the top side, adjacent to the left.
        assert!(r.same_or_adjacent_sides(Vertex::new(0, 2), Vertex::new(5, 5)));
        assert!(r.edge_on_boundary(EdgeId::horizontal(2, 5)));
        assert!(!r.edge_on_boundary(EdgeId::horizontal(2, 4)));
        assert!(!r.edge_on_boundary(EdgeId::vertical(2, 0)));
    }
}
