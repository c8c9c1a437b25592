//! The 5-adic adding machine on truncated digit sequences.
//!
//! A [`DigitSequence`] keeps the first `D` base-5 digits of a point of
//! `{0,..,4}^N`, least significant first. The odometer adds one with carry;
//! iterating it `m` times is the same as adding `m` to the digit prefix read as
//! an integer modulo `5^D`, which is how [`DigitSequence::shift_level`] works.

use crate::error::{Error, Result};

/// Level of an edge; always `>= 1`.
pub type Level = u32;

pub const MIN_PRECISION: usize = 32;
pub const DEFAULT_PRECISION: usize = 48;
/// `5^55 < 2^128 < 5^56`, so the prefix value fits a `u128`.
pub const MAX_PRECISION: usize = 55;

/// `5^e` as a `u128`; panics past `MAX_PRECISION`.
pub(crate) fn pow5(e: usize) -> u128 {
    assert!(e <= MAX_PRECISION, "5^{e} does not fit u128");
    5u128.pow(e as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitSequence {
    digits: Vec<u8>,
}

impl DigitSequence {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        check_precision(digits.len())?;
        if let Some((i, &d)) = digits.iter().enumerate().find(|(_, &d)| d > 4) {
            return Err(Error::InvalidDigit {
                index: i + 1,
                digit: d,
            });
        }
        Ok(Self { digits })
    }

    /// Sequence starting with `prefix` and padded with zeros to `precision`.
    pub fn from_prefix(prefix: &[u8], precision: usize) -> Result<Self> {
        let mut digits = prefix.to_vec();
        if digits.len() > precision {
            return Err(Error::InvalidPrecision {
                got: digits.len(),
                min: MIN_PRECISION,
                max: precision,
            });
        }
        digits.resize(precision, 0);
        Self::new(digits)
    }

    pub fn zeros(precision: usize) -> Result<Self> {
        Self::new(vec![0; precision])
    }

    /// Digits of `value mod 5^precision`, least significant first.
    pub fn from_value(value: u128, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        let mut v = value % pow5(precision);
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            digits.push((v % 5) as u8);
            v /= 5;
        }
        Ok(Self { digits })
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// 1-based digit access.
    pub fn digit(&self, index: usize) -> u8 {
        self.digits[index - 1]
    }

    /// The prefix read as a base-5 integer in `[0, 5^D)`.
    pub fn value(&self) -> u128 {
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * 5 + d as u128)
    }

    /// One step of the odometer: add one to the first digit and carry.
    pub fn step(&self) -> Self {
        let mut digits = self.digits.clone();
        for d in digits.iter_mut() {
            if *d == 4 {
                *d = 0;
            } else {
                *d += 1;
                break;
            }
        }
        Self { digits }
    }

    /// Inverse odometer step (subtract one with borrow).
    pub fn step_back(&self) -> Self {
        let mut digits = self.digits.clone();
        for d in digits.iter_mut() {
            if *d == 0 {
                *d = 4;
            } else {
                *d -= 1;
                break;
            }
        }
        Self { digits }
    }

    /// `L(w)`: index of the first nonzero digit, or `D + 1` if none is.
    pub fn first_nonzero(&self) -> Level {
        self.digits
            .iter()
            .position(|&d| d != 0)
            .map_or(self.precision() as Level + 1, |i| i as Level + 1)
    }

    /// `L(sigma^m(w))` computed by modular addition of `m`.
    pub fn shift_level(&self, m: i64) -> Level {
        level_of_shift(self.value(), m, self.precision())
    }

    /// `sigma^m(w)` as a sequence.
    pub fn shifted(&self, m: i64) -> Self {
        let modulus = pow5(self.precision());
        Self::from_value(add_mod(self.value(), m, modulus), self.precision())
            .expect("precision already validated")
    }
}

fn check_precision(precision: usize) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(Error::InvalidPrecision {
            got: precision,
            min: MIN_PRECISION,
            max: MAX_PRECISION,
        })
    }
}

/// `(value + m) mod modulus` without leaving `u128`, for `value < modulus`.
#[inline]
pub(crate) fn add_mod(value: u128, m: i64, modulus: u128) -> u128 {
    let mag = (m.unsigned_abs() as u128) % modulus;
    if m >= 0 {
        let room = modulus - value;
        if mag >= room {
            mag - room
        } else {
            value + mag
        }
    } else if value >= mag {
        value - mag
    } else {
        modulus - (mag - value)
    }
}

/// Number of trailing base-5 zeros of `r` plus one, capped at `precision + 1`.
#[inline]
pub(crate) fn level_of_residue(mut r: u128, precision: usize) -> Level {
    if r == 0 {
        return precision as Level + 1;
    }
    let mut level = 1;
    while r % 5 == 0 {
        r /= 5;
        level += 1;
    }
    level
}

#[inline]
pub(crate) fn level_of_shift(value: u128, m: i64, precision: usize) -> Level {
    level_of_residue(add_mod(value, m, pow5(precision)), precision)
}

pub fn adding_machine_step(w: &DigitSequence) -> DigitSequence {
    w.step()
}

pub fn first_nonzero(w: &DigitSequence) -> Level {
    w.first_nonzero()
}

pub fn shift_level(w: &DigitSequence, m: i64) -> Level {
    w.shift_level(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(prefix: &[u8]) -> DigitSequence {
        DigitSequence::from_prefix(prefix, DEFAULT_PRECISION).unwrap()
    }

    #[test]
    fn odometer_examples() {
        let a = seq(&[0, 1, 2]);
        assert_eq!(&a.step().digits()[..3], &[1, 1, 2]);

        let b = seq(&[4, 4, 2, 1]);
        assert_eq!(&b.step().digits()[..4], &[0, 0, 3, 1]);

        let fours = DigitSequence::new(vec![4; DEFAULT_PRECISION]).unwrap();
        assert_eq!(fours.step(), DigitSequence::zeros(DEFAULT_PRECISION).unwrap());
    }

    #[test]
    fn first_nonzero_examples() {
        assert_eq!(seq(&[1]).first_nonzero(), 1);
        assert_eq!(seq(&[0, 0, 3]).first_nonzero(), 3);
        assert_eq!(
            DigitSequence::zeros(DEFAULT_PRECISION).unwrap().first_nonzero(),
            DEFAULT_PRECISION as Level + 1
        );
    }

    #[test]
    fn shift_level_examples() {
        assert_eq!(seq(&[0, 1, 2]).shift_level(1), 1);
        assert_eq!(seq(&[4, 4, 2, 1]).shift_level(1), 3);
        let w = seq(&[0, 0, 0, 2]);
        assert_eq!(w.shift_level(0), w.first_nonzero());
    }

    #[test]
    fn rejects_bad_digits_and_precision() {
        assert!(matches!(
            DigitSequence::from_prefix(&[5], DEFAULT_PRECISION),
            Err(Error::InvalidDigit { index: 1, digit: 5 })
        ));
        assert!(DigitSequence::zeros(31).is_err());
        assert!(DigitSequence::zeros(56).is_err());
        assert!(DigitSequence::zeros(55).is_ok());
    }

    #[test]
    fn wraparound_at_max_precision() {
        let top = pow5(MAX_PRECISION);
        assert_eq!(add_mod(top - 1, 1, top), 0);
        assert_eq!(add_mod(0, -1, top), top - 1);
        assert_eq!(add_mod(3, i64::MIN, top), top - (1u128 << 63) + 3);
    }

    fn digits_strategy() -> impl Strategy<Value = DigitSequence> {
        (
            proptest::collection::vec(0u8..5, DEFAULT_PRECISION),
            0usize..DEFAULT_PRECISION,
        )
            .prop_map(|(mut d, zeros)| {
                // Bias toward long runs of zeros/fours so carries get exercised.
                let fill = if zeros % 2 == 0 { 0 } else { 4 };
                for x in d.iter_mut().take(zeros % 6) {
                    *x = fill;
                }
                DigitSequence::new(d).unwrap()
            })
    }

    proptest! {
        #[test]
        fn step_back_inverts_step(w in digits_strategy()) {
            prop_assert_eq!(w.step().step_back(), w.clone());
            prop_assert_eq!(w.step_back().step(), w);
        }

        #[test]
        fn shift_matches_iteration(w in digits_strategy(), m in -300i64..300) {
            let mut it = w.clone();
            for _ in 0..m.unsigned_abs() {
                it = if m > 0 { it.step() } else { it.step_back() };
            }
            prop_assert_eq!(w.shift_level(m), it.first_nonzero());
            prop_assert_eq!(w.shifted(m), it);
        }

        #[test]
        fn value_roundtrip(w in digits_strategy()) {
            prop_assert_eq!(DigitSequence::from_value(w.value(), w.precision()).unwrap(), w);
        }
    }
}
