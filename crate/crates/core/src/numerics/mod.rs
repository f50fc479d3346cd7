//! Dense linear algebra and special functions.
//!
//! Everything here is small-scale (at most a few thousand rows) and favours
//! robustness: LU with partial pivoting, a typed cap on Kronecker growth, and
//! an incomplete-gamma based chi-squared tail.

mod linalg;
mod matrix;
pub mod simplex;
mod special;

pub use linalg::{kron, kron_capped, linear_solve, LuFactors, DEFAULT_KRON_CAP, SINGULAR_PIVOT};
pub use matrix::Matrix;
pub use special::{
    chi_squared_cdf, chi_squared_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("result of {rows}x{cols} exceeds the entry cap {cap}")]
    SizeOverflow {
        rows: usize,
        cols: usize,
        cap: usize,
    },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

/// Index of the largest entry; ties go to the lowest index.
///
/// NaN entries never win.
pub fn argmax_tiebreak(values: &[f64]) -> Result<usize, NumericsError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b || v.is_nan() => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    match best {
        Some((i, _)) => Ok(i),
        None if values.is_empty() => Err(NumericsError::EmptyInput),
        None => Ok(0),
    }
}

/// Sup-norm of a slice.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_tiebreak(&[0.1, 0.9]).unwrap(), 1);
        assert_eq!(argmax_tiebreak(&[0.5, 0.5]).unwrap(), 0);
        assert_eq!(argmax_tiebreak(&[-1.0, -1.0, 0.0]).unwrap(), 2);
        assert_eq!(argmax_tiebreak(&[]), Err(NumericsError::EmptyInput));
    }

    #[test]
    fn argmax_skips_nan() {
        assert_eq!(argmax_tiebreak(&[f64::NAN, 0.2, 0.1]).unwrap(), 1);
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_shift_and_scale(
            v in proptest::collection::vec(-10i32..10, 1..12),
            shift in -100.0f64..100.0,
            scale in 0.01f64..50.0,
        ) {
            // integer-valued entries keep ties exact after the affine map
            let base: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let shifted: Vec<f64> = base.iter().map(|x| x + shift.round()).collect();
            let scaled: Vec<f64> = base.iter().map(|x| x * scale).collect();
            let a = argmax_tiebreak(&base).unwrap();
            prop_assert_eq!(a, argmax_tiebreak(&shifted).unwrap());
            prop_assert_eq!(a, argmax_tiebreak(&scaled).unwrap());
        }
    }
}
