//! Brute-force oracles and structural lemma checkers.

mod brute;
mod lemmas;

pub use brute::{
    brute_force_distance, enumeration_distance, relaxation_distance, Window,
    MAX_ENUMERATION_WINDOW, MAX_WINDOW, ORACLE_TOLERANCE,
};
pub use lemmas::{
    check, check_corner_corollary, check_corner_passage, check_rectangle_lemma,
    check_same_vertex, check_square_lemma, last_corner, quadrant, Lemma, LemmaReport,
};
