use ergofpp::lattice::{spacing, Axis, Environment, Vertex};
use ergofpp::padic::{adding_machine_step, DigitSequence, DEFAULT_PRECISION};
use ergofpp::Error;
use proptest::prelude::*;

fn digits() -> impl Strategy<Value = DigitSequence> {
    prop::collection::vec(0u8..5, DEFAULT_PRECISION).prop_map(|d| DigitSequence::new(d).unwrap())
}

fn env_from(h: DigitSequence, v: DigitSequence) -> Environment {
    Environment::new(0.1, h, v, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_level_matches_iteration_far_out(w in digits(), m in -10_000i64..=10_000) {
        let mut it = w.clone();
        for _ in 0..m.unsigned_abs() {
            it = if m > 0 { adding_machine_step(&it) } else { it.step_back() };
        }
        prop_assert_eq!(w.shift_level(m), it.first_nonzero());
        prop_assert_eq!(w.shifted(m), it);
    }

    #[test]
    fn grid_lines_form_nested_progressions(h in digits(), v in digits(), lo in -5000i64..5000, k in 1u32..5) {
        let env = env_from(h, v);
        let s = spacing(k).unwrap();
        for axis in [Axis::Row, Axis::Col] {
            let lines = env.grid_lines(k, lo, lo + 400, axis).unwrap();
            prop_assert!(lines.windows(2).all(|w| w[1] - w[0] == s));
            let finer = env.grid_lines(k, lo, lo + 400, axis).unwrap();
            let coarser = env.grid_lines(k + 1, lo, lo + 400, axis).unwrap();
            prop_assert!(coarser.iter().all(|c| finer.contains(c)));
            for y in lo..=lo + 400 {
                let level = env.line_level(axis, y).unwrap();
                prop_assert_eq!(level >= k, lines.contains(&y));
            }
        }
    }

    #[test]
    fn squares_contain_their_vertex(h in digits(), v in digits(), x in -10_000i64..10_000, y in -10_000i64..10_000, k in 1u32..6) {
        let env = env_from(h, v);
        let p = Vertex::new(x, y);
        let sq = env.enclosing_square(p, k).unwrap();
        let (dx, dy) = sq.offset_of(p);
        prop_assert!((0..sq.side).contains(&dx) && (0..sq.side).contains(&dy));
        let [v1, v2, v3, v4] = sq.corners();
        prop_assert!(v1.x > v2.x && v1.y == v2.y && v3.y < v2.y && v4.x == v1.x && v4.y == v3.y);
        prop_assert!(env.row_level(v3.y).unwrap() >= k && env.col_level(v3.x).unwrap() >= k);
        prop_assert!(env.row_level(v1.y).unwrap() >= k && env.col_level(v1.x).unwrap() >= k);
    }

    /// The offset of `v` inside `V_k(v)` depends on the digits that fix the
    /// k-grid and on `v` modulo the spacing, nothing else.
    #[test]
    fn corner_position_depends_on_leading_digits(
        h in digits(), v in digits(), tail_h in digits(), tail_v in digits(),
        x in -5000i64..5000, y in -5000i64..5000, k in 1u32..5, jx in -3i64..3, jy in -3i64..3,
    ) {
        let keep = (k - 1) as usize;
        let splice = |head: &DigitSequence, tail: &DigitSequence| {
            let mut d = tail.digits().to_vec();
            d[..keep].copy_from_slice(&head.digits()[..keep]);
            DigitSequence::new(d).unwrap()
        };
        let a = env_from(h.clone(), v.clone());
        let b = env_from(splice(&h, &tail_h), splice(&v, &tail_v));
        let s = spacing(k).unwrap();
        let p = Vertex::new(x, y);
        let q = Vertex::new(x + jx * s, y + jy * s);
        let pa = a.enclosing_square(p, k).unwrap().offset_of(p);
        let pb = b.enclosing_square(q, k).unwrap().offset_of(q);
        prop_assert_eq!(pa, pb);
    }
}

#[test]
fn precision_guard_is_explicit() {
    let env = Environment::from_seed_with_precision(0.1, 1, 32).unwrap();
    let guard = env.coordinate_guard();
    assert_eq!(guard, 5i64.pow(24));
    assert!(env.row_level(guard).is_ok());
    assert!(matches!(env.row_level(guard + 1), Err(Error::Precision { .. })));
    assert!(matches!(env.col_level(-guard - 1), Err(Error::Precision { .. })));
}
