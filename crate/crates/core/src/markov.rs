//! Label dynamics within a task: transition estimation, a chi-squared test
//! against the i.i.d. hypothesis, and seeded Markov stream generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{chi_squared_sf, Matrix, NumericsError};

/// Row sums may deviate from 1 by at most this much.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("label sequence needs at least two labels")]
    EmptySequence,
    #[error("label {label} at position {position} is not below the class count {classes}")]
    LabelOutOfRange {
        position: usize,
        label: usize,
        classes: usize,
    },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("contingency table has zero degrees of freedom")]
    DegenerateTable,
    #[error("chain is reducible: state {0} cannot be reached from every other state")]
    Reducible(usize),
    #[error("power iteration did not converge in {0} steps")]
    NoConvergence(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Ordered class labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSequence {
    labels: Vec<usize>,
    classes: usize,
}

impl LabelSequence {
    pub fn new(labels: Vec<usize>, classes: usize) -> Result<Self, MarkovError> {
        if let Some((position, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(MarkovError::LabelOutOfRange {
                position,
                label,
                classes,
            });
        }
        Ok(Self { labels, classes })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Square row-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix(Matrix);

impl TransitionMatrix {
    pub fn new(m: Matrix) -> Result<Self, MarkovError> {
        if !m.is_square() {
            return Err(MarkovError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        for r in 0..m.rows() {
            let row = m.row(r);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL || row.iter().any(|&p| p < 0.0) {
                return Err(MarkovError::NotStochastic { row: r, sum });
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn uniform(n: usize) -> Self {
        Self(Matrix::new(n, n, vec![1.0 / n as f64; n * n]).expect("finite"))
    }

    pub fn states(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.0.get(from, to)
    }

    pub fn row(&self, from: usize) -> &[f64] {
        self.0.row(from)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = MarkovError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::from_rows(&rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(t: TransitionMatrix) -> Self {
        t.0.to_rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    pub probs: TransitionMatrix,
    pub counts: Vec<Vec<u64>>,
    /// Number of occurrences of each label that have a successor.
    pub row_totals: Vec<u64>,
    /// Rows that were never left; they are filled with the uniform row.
    pub unseen_rows: Vec<usize>,
}

impl TransitionEstimate {
    pub fn total(&self) -> u64 {
        self.row_totals.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceTestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub reject_at_05: bool,
}

/// Counts adjacent label pairs and normalises each row by the number of
/// jumps out of that label.
pub fn estimate_transitions(seq: &LabelSequence) -> Result<TransitionEstimate, MarkovError> {
    if seq.len() < 2 {
        return Err(MarkovError::EmptySequence);
    }
    let c = seq.classes();
    let mut counts = vec![vec![0u64; c]; c];
    for w in seq.labels().windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let mut unseen_rows = Vec::new();
    let mut data = Vec::with_capacity(c * c);
    for (r, row) in counts.iter().enumerate() {
        if row_totals[r] == 0 {
            unseen_rows.push(r);
            data.extend(std::iter::repeat_n(1.0 / c as f64, c));
        } else {
            let total = row_totals[r] as f64;
            data.extend(row.iter().map(|&n| n as f64 / total));
        }
    }
    let probs = TransitionMatrix::new(Matrix::new(c, c, data)?)?;
    Ok(TransitionEstimate {
        probs,
        counts,
        row_totals,
        unseen_rows,
    })
}

/// Pearson test of independence on the transition count table.
///
/// Cells with zero expected count are skipped and the degrees of freedom are
/// taken over rows and columns with a nonzero marginal.
pub fn chi_squared_independence(
    est: &TransitionEstimate,
) -> Result<IndependenceTestResult, MarkovError> {
    chi_squared_table(&est.counts)
}

pub fn chi_squared_table(counts: &[Vec<u64>]) -> Result<IndependenceTestResult, MarkovError> {
    let rows = counts.len();
    let cols = counts.first().map_or(0, Vec::len);
    let row_tot: Vec<f64> = counts
        .iter()
        .map(|r| r.iter().sum::<u64>() as f64)
        .collect();
    let col_tot: Vec<f64> = (0..cols)
        .map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_tot.iter().sum();
    let active_rows = row_tot.iter().filter(|&&t| t > 0.0).count();
    let active_cols = col_tot.iter().filter(|&&t| t > 0.0).count();
    if total == 0.0 || active_rows < 2 || active_cols < 2 {
        return Err(MarkovError::DegenerateTable);
    }
    let mut statistic = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let expected = row_tot[i] * col_tot[j] / total;
            if expected > 0.0 {
                let d = counts[i][j] as f64 - expected;
                statistic += d * d / expected;
            }
        }
    }
    let df = (active_rows - 1) * (active_cols - 1);
    let p_value = chi_squared_sf(statistic, df);
    Ok(IndependenceTestResult {
        statistic,
        df,
        p_value,
        reject_at_05: p_value <= 0.05,
    })
}

/// Samples `length` labels from the chain, starting at `init`.
pub fn generate_markov_stream(
    p: &TransitionMatrix,
    init: usize,
    length: usize,
    seed: u64,
) -> Result<LabelSequence, MarkovError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(p, init, length, &mut rng)
}

pub(crate) fn generate_with_rng<R: Rng>(
    p: &TransitionMatrix,
    init: usize,
    length: usize,
    rng: &mut R,
) -> Result<LabelSequence, MarkovError> {
    let c = p.states();
    if init >= c {
        return Err(MarkovError::LabelOutOfRange {
            position: 0,
            label: init,
            classes: c,
        });
    }
    let mut labels = Vec::with_capacity(length);
    if length == 0 {
        return LabelSequence::new(labels, c);
    }
    let mut state = init;
    labels.push(state);
    for _ in 1..length {
        state = sample_row(p.row(state), rng.random::<f64>());
        labels.push(state);
    }
    LabelSequence::new(labels, c)
}

fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = j;
            acc += p;
            if u < acc {
                return j;
            }
        }
    }
    // u landed in the round-off gap above the final cumulative sum
    last_positive
}

/// Stationary distribution of an irreducible chain.
///
/// Iterates the lazy chain `(P + I) / 2`, which shares the stationary
/// distribution of `P` and is aperiodic.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Vec<f64>, MarkovError> {
    const MAX_STEPS: usize = 100_000;
    const TOL: f64 = 1e-10;
    let n = p.states();
    check_irreducible(p)?;

    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..MAX_STEPS {
        let pp = left_multiply(&pi, p);
        let residual = pp
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= TOL {
            return Ok(pi);
        }
        let mut next: Vec<f64> = pi.iter().zip(&pp).map(|(a, b)| 0.5 * (a + b)).collect();
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        pi = next;
    }
    Err(MarkovError::NoConvergence(MAX_STEPS))
}

pub(crate) fn left_multiply(pi: &[f64], p: &TransitionMatrix) -> Vec<f64> {
    let n = p.states();
    let mut out = vec![0.0; n];
    for (i, &w) in pi.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * p.get(i, j);
        }
    }
    out
}

fn check_irreducible(p: &TransitionMatrix) -> Result<(), MarkovError> {
    let n = p.states();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in 0..n {
                let w = if forward { p.get(s, t) } else { p.get(t, s) };
                if w > 0.0 && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    };
    for seen in [reach(true), reach(false)] {
        if let Some(s) = seen.iter().position(|&v| !v) {
            return Err(MarkovError::Reducible(s));
        }
    }
    Ok(())
}

/// Sample transition matrix reported for the extreme-weather subsets.
pub fn weather_reference_matrix() -> TransitionMatrix {
    TransitionMatrix::from_rows(&[
        vec![0.721, 0.256, 0.020, 0.003],
        vec![0.052, 0.901, 0.033, 0.014],
        vec![0.004, 0.037, 0.939, 0.020],
        vec![0.000, 0.017, 0.454, 0.529],
    ])
    .expect("rows sum to one")
}
