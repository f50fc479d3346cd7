//! Dense revised simplex for small equality-form linear programs.
//!
//! Solves `maximize cᵀx  s.t.  Ax = b, x ≥ 0`. The basis matrix is
//! refactorised from scratch on every iteration, which keeps round-off from
//! accumulating at the sizes used here (a few hundred rows at most).
//! Pricing is Dantzig's rule, switching to Bland's rule after a run of
//! degenerate pivots so the method cannot cycle.

use super::linalg::LuFactors;
use super::{Matrix, NumericsError};

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Reduced costs above this are considered improving.
    pub optimality_tol: f64,
    /// Direction entries below this are ignored in the ratio test.
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            optimality_tol: 1e-11,
            pivot_tol: 1e-10,
            max_iterations: 50_000,
            bland_after: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers `y` with `Bᵀy = c_B`, i.e. the dual solution.
    pub duals: Vec<f64>,
    /// Column index of the basic variable in each row.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(a: Matrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self, NumericsError> {
        if b.len() != a.rows() || c.len() != a.cols() {
            return Err(NumericsError::DimensionMismatch(format!(
                "A is {}x{}, b has {}, c has {}",
                a.rows(),
                a.cols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }

    /// Two-phase solve starting from an all-artificial basis.
    pub fn maximize(&self, opts: SimplexOptions) -> Result<LpSolution, NumericsError> {
        let m = self.num_rows();
        let n = self.num_vars();

        // Phase I on [A | I] with rows sign-normalised so b ≥ 0.
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| self.column(j)).collect();
        let mut b = self.b.clone();
        for (i, bi) in b.iter_mut().enumerate() {
            if *bi < 0.0 {
                *bi = -*bi;
                for col in cols.iter_mut() {
                    col[i] = -col[i];
                }
            }
        }
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            cols.push(e);
        }
        let mut phase1_cost = vec![0.0; n + m];
        for c in phase1_cost.iter_mut().skip(n) {
            *c = -1.0;
        }
        let allowed_all: Vec<bool> = vec![true; n + m];
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut iterations = 0;

        let phase1 = run(
            &cols,
            &b,
            &phase1_cost,
            &allowed_all,
            &mut basis,
            opts,
            &mut iterations,
        )?;
        let scale = 1.0 + b.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        if phase1.objective < -1e-9 * scale {
            return Err(NumericsError::Infeasible);
        }

        // Pivot zero-level artificials out of the basis where possible.
        for r in 0..m {
            if basis[r] < n {
                continue;
            }
            let lu = LuFactors::factor(&basis_matrix(&cols, &basis))?;
            let mut e = vec![0.0; m];
            e[r] = 1.0;
            let row = lu.solve_transpose(&e)?;
            let candidate = (0..n)
                .filter(|j| !basis.contains(j))
                .find(|&j| dot(&row, &cols[j]).abs() > 1e-7);
            if let Some(j) = candidate {
                basis[r] = j;
            }
            // Otherwise the row is redundant; the artificial stays at zero.
        }

        let mut cost = self.c.clone();
        cost.extend(std::iter::repeat_n(0.0, m));
        let allowed: Vec<bool> = (0..n + m).map(|j| j < n).collect();
        let sol = run(
            &cols,
            &b,
            &cost,
            &allowed,
            &mut basis,
            opts,
            &mut iterations,
        )?;
        self.finish(sol, &basis, iterations)
    }

    /// Phase II only, from a basis the caller knows to be primal feasible.
    pub fn maximize_from_basis(
        &self,
        basis: Vec<usize>,
        opts: SimplexOptions,
    ) -> Result<LpSolution, NumericsError> {
        let m = self.num_rows();
        if basis.len() != m || basis.iter().any(|&j| j >= self.num_vars()) {
            return Err(NumericsError::DimensionMismatch("initial basis".into()));
        }
        let cols: Vec<Vec<f64>> = (0..self.num_vars()).map(|j| self.column(j)).collect();
        let mut basis = basis;
        let lu = LuFactors::factor(&basis_matrix(&cols, &basis))?;
        let xb = lu.solve(&self.b)?;
        if xb.iter().any(|&v| v < -1e-9) {
            return Err(NumericsError::Infeasible);
        }
        let allowed = vec![true; self.num_vars()];
        let mut iterations = 0;
        let sol = run(
            &cols,
            &self.b,
            &self.c,
            &allowed,
            &mut basis,
            opts,
            &mut iterations,
        )?;
        self.finish(sol, &basis, iterations)
    }

    fn finish(
        &self,
        sol: Phase,
        basis: &[usize],
        iterations: usize,
    ) -> Result<LpSolution, NumericsError> {
        let n = self.num_vars();
        let mut x = vec![0.0; n];
        for (r, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = sol.xb[r].max(0.0);
            }
        }
        // Duals are reported for the caller's row signs.
        let mut duals = sol.duals;
        for (i, y) in duals.iter_mut().enumerate() {
            if self.b[i] < 0.0 {
                *y = -*y;
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        Ok(LpSolution {
            x,
            objective,
            duals,
            basis: basis.to_vec(),
            iterations,
        })
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.num_rows()).map(|i| self.a.get(i, j)).collect()
    }
}

struct Phase {
    xb: Vec<f64>,
    duals: Vec<f64>,
    objective: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn basis_matrix(cols: &[Vec<f64>], basis: &[usize]) -> Matrix {
    let m = basis.len();
    let mut bm = Matrix::zeros(m, m);
    for (r, &j) in basis.iter().enumerate() {
        for i in 0..m {
            bm.set(i, r, cols[j][i]);
        }
    }
    bm
}

fn run(
    cols: &[Vec<f64>],
    b: &[f64],
    cost: &[f64],
    allowed: &[bool],
    basis: &mut [usize],
    opts: SimplexOptions,
    iterations: &mut usize,
) -> Result<Phase, NumericsError> {
    let m = basis.len();
    let mut in_basis = vec![false; cols.len()];
    for &j in basis.iter() {
        in_basis[j] = true;
    }
    let mut degenerate_run = 0usize;

    loop {
        let lu = LuFactors::factor(&basis_matrix(cols, basis))?;
        let xb = lu.solve(b)?;
        let cb: Vec<f64> = basis.iter().map(|&j| cost[j]).collect();
        let duals = lu.solve_transpose(&cb)?;

        let use_bland = degenerate_run >= opts.bland_after;
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..cols.len() {
            if in_basis[j] || !allowed[j] {
                continue;
            }
            let d = cost[j] - dot(&duals, &cols[j]);
            if d <= opts.optimality_tol {
                continue;
            }
            match entering {
                None => entering = Some((j, d)),
                Some((_, best)) if !use_bland && d > best => entering = Some((j, d)),
                _ => {}
            }
            if use_bland {
                break;
            }
        }

        let Some((q, _)) = entering else {
            let objective = dot(&cb, &xb);
            return Ok(Phase {
                xb,
                duals,
                objective,
            });
        };

        *iterations += 1;
        if *iterations > opts.max_iterations {
            return Err(NumericsError::NoConvergence(opts.max_iterations));
        }

        let u = lu.solve(&cols[q])?;
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if u[r] <= opts.pivot_tol {
                continue;
            }
            let ratio = xb[r].max(0.0) / u[r];
            match leave {
                None => leave = Some((r, ratio)),
                Some((lr, best)) => {
                    let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                    if (!tie && ratio < best) || (tie && basis[r] < basis[lr]) {
                        leave = Some((r, ratio));
                    }
                }
            }
        }
        let Some((r, step)) = leave else {
            return Err(NumericsError::Unbounded);
        };

        degenerate_run = if step <= 1e-12 { degenerate_run + 1 } else { 0 };
        in_basis[basis[r]] = false;
        in_basis[q] = true;
        basis[r] = q;
    }
}
