use super::{Matrix, NumericsError};

/// Pivots smaller than this in magnitude are treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Default cap on the number of entries a Kronecker product may produce.
pub const DEFAULT_KRON_CAP: usize = 1 << 24;

/// LU factorisation `PA = LU` with partial pivoting, packed in one buffer.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &Matrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|r| (r, lu[r * n + k]))
                    .fold((k, 0.0_f64), |best, (r, v)| {
                        if v.abs() > best.1.abs() {
                            (r, v)
                        } else {
                            best
                        }
                    });
            if pivot.abs() < SINGULAR_PIVOT {
                return Err(NumericsError::SingularMatrix { column: k, pivot });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            for r in k + 1..n {
                let f = lu[r * n + k] / pivot;
                lu[r * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= f * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `Ax = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.n;
        self.check_len(b)?;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] = (x[r] - s) / self.lu[r * n + r];
        }
        Ok(x)
    }

    /// Solves `Aᵀy = c`.
    pub fn solve_transpose(&self, c: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.n;
        self.check_len(c)?;
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = c, Lᵀ w = z, then y = Pᵀ w.
        let mut z = c.to_vec();
        for r in 0..n {
            let s: f64 = (0..r).map(|k| self.lu[k * n + r] * z[k]).sum();
            z[r] = (z[r] - s) / self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| self.lu[k * n + r] * z[k]).sum();
            z[r] -= s;
        }
        let mut y = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        Ok(y)
    }

    fn check_len(&self, b: &[f64]) -> Result<(), NumericsError> {
        if b.len() != self.n {
            return Err(NumericsError::DimensionMismatch(format!(
                "right-hand side of length {} for a {}x{} system",
                b.len(),
                self.n,
                self.n
            )));
        }
        Ok(())
    }
}

/// Solves the square system `Ax = b` by LU with partial pivoting.
pub fn linear_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    LuFactors::factor(a)?.solve(b)
}

/// Kronecker product with the default entry cap.
pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix, NumericsError> {
    kron_capped(a, b, DEFAULT_KRON_CAP)
}

pub fn kron_capped(a: &Matrix, b: &Matrix, cap: usize) -> Result<Matrix, NumericsError> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some_and(|n| n <= cap) => (r, c),
        _ => {
            return Err(NumericsError::SizeOverflow {
                rows: a.rows().saturating_mul(b.rows()),
                cols: a.cols().saturating_mul(b.cols()),
                cap,
            })
        }
    };
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm_inf;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x).unwrap();
        norm_inf(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::new(
            r,
            c,
            (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let mut rows = Vec::new();
        for _ in 0..n {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            rows.push(raw.iter().map(|x| x / s).collect());
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn solve_identity() {
        let x = linear_solve(&Matrix::identity(2), &[3.0, -1.0]).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
    }

    #[test]
    fn solve_lower_triangular_fixture() {
        // forward substitution by hand: x0 = 1/0.55 = 20/11, x1 = 0.45 x0 = 9/11
        let a = Matrix::from_rows(&[vec![0.55, 0.0], vec![-0.45, 1.0]]).unwrap();
        let x = linear_solve(&a, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 20.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 9.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn solve_rank_deficient_is_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(
            linear_solve(&a, &[1.0, 5.0]),
            Err(NumericsError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn solve_rejects_bad_shapes() {
        assert!(linear_solve(&Matrix::zeros(2, 3), &[1.0, 1.0]).is_err());
        assert!(linear_solve(&Matrix::identity(2), &[1.0]).is_err());
    }

    #[test]
    fn transpose_solve_matches_explicit_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..8 {
            let a = random_matrix(&mut rng, n, n);
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lu = LuFactors::factor(&a).unwrap();
            let y = lu.solve_transpose(&c).unwrap();
            assert!(residual(&a.transpose(), &y, &c) < 1e-9);
        }
    }

    #[test]
    fn kron_identities() {
        let i2 = Matrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), Matrix::identity(4));

        let swap = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let k = kron(&swap, &i2).unwrap();
        let expected = Matrix::from_rows(&[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_of_stochastic_is_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_stochastic(&mut rng, 3);
            let b = random_stochastic(&mut rng, 3);
            assert!(kron(&a, &b).unwrap().max_row_sum_deviation() < 1e-12);
        }
    }

    #[test]
    fn kron_cap_is_enforced() {
        let a = Matrix::identity(64);
        assert!(matches!(
            kron_capped(&a, &a, 1000),
            Err(NumericsError::SizeOverflow {
                rows: 4096,
                cols: 4096,
                cap: 1000
            })
        ));
        assert!(kron_capped(&a, &a, 4096 * 4096).is_ok());
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, m) in &[(2, 3), (3, 2), (2, 2), (3, 3)] {
            let a = random_matrix(&mut rng, n, n);
            let c = random_matrix(&mut rng, n, n);
            let b = random_matrix(&mut rng, m, m);
            let d = random_matrix(&mut rng, m, m);
            let lhs = kron(&a, &b)
                .unwrap()
                .matmul(&kron(&c, &d).unwrap())
                .unwrap();
            let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn solve_residual_on_well_conditioned(seed in 0u64..10_000, n in 1usize..24) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // diagonally boosted random matrices keep the condition number modest
            let mut a = random_matrix(&mut rng, n, n);
            for i in 0..n {
                a.set(i, i, a.get(i, i) + n as f64);
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
            let x = linear_solve(&a, &b).unwrap();
            prop_assert!(residual(&a, &x, &b) <= 1e-9 * (1.0 + norm_inf(&b)));
        }
    }
}
