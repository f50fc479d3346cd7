// Negated float comparisons are deliberate: they reject NaN alongside
// out-of-range values. Index loops mirror the matrix algebra they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
pub mod harness;
pub mod learner;
pub mod markov;
pub mod numerics;
pub mod reward;
pub mod schedulers;
