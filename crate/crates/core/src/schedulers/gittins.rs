use serde::{Deserialize, Serialize};

use super::{
    availability, check_discount, masked_argmax, Scheduler, SchedulerError, SchedulerKind,
};
use crate::markov::TransitionMatrix;
use crate::numerics::{LuFactors, Matrix, NumericsError};
use crate::reward::RewardTable;

/// Gittins indices of one Markov reward chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GittinsIndex {
    pub indices: Vec<f64>,
    /// States in the order they were peeled; indices are non-increasing along it.
    pub ordering: Vec<usize>,
}

/// Largest-remaining-index computation.
///
/// The first state is the reward maximiser. At each later step the
/// continuation set holds the states already peeled; with `Q` the transition
/// matrix restricted to columns in that set, `d = (I − βQ)⁻¹ r` and
/// `b = (I − βQ)⁻¹ 1`, and the next state is the argmax of `d / b` over the
/// stopping set. Ties go to the lowest state index.
pub fn gittins_compute(
    p: &TransitionMatrix,
    r: &[f64],
    beta: f64,
) -> Result<GittinsIndex, SchedulerError> {
    check_discount(beta)?;
    let c = p.states();
    if r.len() != c {
        return Err(SchedulerError::ShapeMismatch(format!(
            "{} rewards for {c} states",
            r.len()
        )));
    }
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite(i).into());
    }

    let mut indices = vec![0.0; c];
    let mut ordering = Vec::with_capacity(c);
    let mut continuing = vec![false; c];

    let first = crate::numerics::argmax_tiebreak(r)?;
    indices[first] = r[first];
    ordering.push(first);
    continuing[first] = true;

    let ones = vec![1.0; c];
    for _ in 1..c {
        let mut a = Matrix::identity(c);
        for i in 0..c {
            for j in (0..c).filter(|&j| continuing[j]) {
                a.set(i, j, a.get(i, j) - beta * p.get(i, j));
            }
        }
        let lu = LuFactors::factor(&a)?;
        let d = lu.solve(r)?;
        let b = lu.solve(&ones)?;
        let mut best: Option<(usize, f64)> = None;
        for s in (0..c).filter(|&s| !continuing[s]) {
            let ratio = d[s] / b[s];
            if best.is_none_or(|(_, v)| ratio > v) {
                best = Some((s, ratio));
            }
        }
        let (s, v) = best.expect("stopping set is non-empty");
        indices[s] = v;
        ordering.push(s);
        continuing[s] = true;
    }
    Ok(GittinsIndex { indices, ordering })
}

/// Gittins indices through the retirement characterisation.
///
/// For a per-step retirement reward `λ` the optimal value solves
/// `W = max(λ/(1−β), r + βPW)`. The index of state `s` is the `λ` at which
/// continuing from `s` and retiring are equally good; the gap is
/// non-increasing in `λ`, so bisection on `[min r, max r]` finds it.
pub fn gittins_oracle(
    p: &TransitionMatrix,
    r: &[f64],
    beta: f64,
) -> Result<Vec<f64>, SchedulerError> {
    check_discount(beta)?;
    let c = p.states();
    if r.len() != c {
        return Err(SchedulerError::ShapeMismatch(format!(
            "{} rewards for {c} states",
            r.len()
        )));
    }
    let lo0 = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi0 = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut out = Vec::with_capacity(c);
    for s in 0..c {
        let (mut lo, mut hi) = (lo0, hi0);
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            let w = retirement_values(p, r, beta, mid)?;
            let cont = r[s] + beta * p.row(s).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            if cont > mid / (1.0 - beta) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

fn retirement_values(
    p: &TransitionMatrix,
    r: &[f64],
    beta: f64,
    lambda: f64,
) -> Result<Vec<f64>, SchedulerError> {
    let c = p.states();
    let retire = lambda / (1.0 - beta);
    let mut w = vec![retire; c];
    // sup-norm error ≤ change·β/(1−β) ≤ 1e-12
    let stop = 1e-12 * (1.0 - beta) / beta;
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..c)
            .map(|x| {
                let cont = r[x] + beta * p.row(x).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                cont.max(retire)
            })
            .collect();
        let change = next
            .iter()
            .zip(&w)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        w = next;
        if change <= stop {
            return Ok(w);
        }
    }
    Err(NumericsError::NoConvergence(100_000).into())
}

/// Per-task Gittins indices for every class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GittinsTable {
    pub beta: f64,
    /// `indices[i][c]`.
    pub indices: Vec<Vec<f64>>,
    pub ordering: Vec<Vec<usize>>,
}

impl GittinsTable {
    pub fn compute(
        transitions: &[TransitionMatrix],
        rewards: &RewardTable,
        beta: f64,
    ) -> Result<Self, SchedulerError> {
        if transitions.len() != rewards.tasks() {
            return Err(SchedulerError::ShapeMismatch(format!(
                "{} transition matrices for {} reward rows",
                transitions.len(),
                rewards.tasks()
            )));
        }
        let mut indices = Vec::with_capacity(transitions.len());
        let mut ordering = Vec::with_capacity(transitions.len());
        for (p, r) in transitions.iter().zip(&rewards.values) {
            let g = gittins_compute(p, r, beta)?;
            indices.push(g.indices);
            ordering.push(g.ordering);
        }
        Ok(Self {
            beta,
            indices,
            ordering,
        })
    }

    /// Task whose upcoming label has the largest index.
    pub fn select(&self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        if upcoming.len() != self.indices.len() {
            return Err(SchedulerError::ShapeMismatch(format!(
                "{} tasks for {} tables",
                upcoming.len(),
                self.indices.len()
            )));
        }
        let mut scores = vec![f64::NEG_INFINITY; upcoming.len()];
        for (i, u) in upcoming.iter().enumerate() {
            if let Some(c) = *u {
                let row = &self.indices[i];
                scores[i] = *row.get(c).ok_or(SchedulerError::LabelOutOfRange {
                    task: i,
                    label: c,
                    classes: row.len(),
                })?;
            }
        }
        masked_argmax(&scores, &availability(upcoming))
    }
}

#[derive(Debug, Clone)]
pub struct GittinsScheduler {
    pub table: GittinsTable,
}

impl Scheduler for GittinsScheduler {
    fn kind(&self) -> SchedulerKind {
        SchedulerKind::Gittins
    }

    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        self.table.select(upcoming)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chain(rng: &mut ChaCha8Rng, c: usize) -> TransitionMatrix {
        let rows: Vec<Vec<f64>> = (0..c)
            .map(|_| {
                let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>() + 0.01).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            })
            .collect();
        TransitionMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn symmetric_two_state_chain() {
        let p = TransitionMatrix::uniform(2);
        let g = gittins_compute(&p, &[1.0, 0.0], 0.9).unwrap();
        assert_eq!(g.ordering, vec![0, 1]);
        assert!((g.indices[0] - 1.0).abs() < 1e-12);
        assert!((g.indices[1] - 0.45).abs() < 1e-12);
        let o = gittins_oracle(&p, &[1.0, 0.0], 0.9).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-6 && (o[1] - 0.45).abs() < 1e-6);
    }

    #[test]
    fn absorbing_states_keep_their_reward() {
        let p = TransitionMatrix::identity(2);
        let g = gittins_compute(&p, &[0.9, 0.5], 0.9).unwrap();
        assert!((g.indices[0] - 0.9).abs() < 1e-12 && (g.indices[1] - 0.5).abs() < 1e-12);
        let o = gittins_oracle(&p, &[0.9, 0.5], 0.9).unwrap();
        assert!((o[0] - 0.9).abs() < 1e-6 && (o[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_chain(&mut rng, 4);
        let g = gittins_compute(&p, &[0.3; 4], 0.7).unwrap();
        assert!(g.indices.iter().all(|&v| (v - 0.3).abs() < 1e-12));
        let o = gittins_oracle(&p, &[0.3; 4], 0.7).unwrap();
        assert!(o.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = TransitionMatrix::uniform(2);
        assert_eq!(
            gittins_compute(&p, &[1.0, 0.0], 1.0),
            Err(SchedulerError::BadDiscount(1.0))
        );
        assert!(matches!(
            gittins_compute(&p, &[1.0], 0.5),
            Err(SchedulerError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn matches_oracle_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for k in 0..20 {
            let c = 2 + k % 5;
            let beta = if k % 2 == 0 { 0.5 } else { 0.9 };
            let p = random_chain(&mut rng, c);
            let r: Vec<f64> = (0..c).map(|_| rng.random()).collect();
            let g = gittins_compute(&p, &r, beta).unwrap();
            let o = gittins_oracle(&p, &r, beta).unwrap();
            for s in 0..c {
                assert!((g.indices[s] - o[s]).abs() <= 1e-6, "chain {k} state {s}");
            }
        }
    }

    #[test]
    fn table_selection() {
        let table = GittinsTable {
            beta: 0.9,
            indices: vec![vec![0.9, 0.2], vec![0.45, 0.3]],
            ordering: vec![],
        };
        assert_eq!(table.select(&[Some(0), Some(0)]).unwrap(), 0);
        assert_eq!(table.select(&[Some(1), Some(0)]).unwrap(), 1);
        assert_eq!(table.select(&[None, Some(1)]).unwrap(), 1);
        assert_eq!(
            table.select(&[None, None]),
            Err(SchedulerError::AllExhausted)
        );
        assert!(matches!(
            table.select(&[Some(5), None]),
            Err(SchedulerError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn table_matches_scripted_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let transitions: Vec<TransitionMatrix> =
            (0..3).map(|_| random_chain(&mut rng, 4)).collect();
        let rewards = RewardTable {
            values: (0..3)
                .map(|_| (0..4).map(|_| rng.random()).collect())
                .collect(),
        };
        let table = GittinsTable::compute(&transitions, &rewards, 0.9).unwrap();
        for _ in 0..100 {
            let upcoming: Vec<Option<usize>> =
                (0..3).map(|_| Some(rng.random_range(0..4))).collect();
            let mut best = 0;
            for i in 1..3 {
                if table.indices[i][upcoming[i].unwrap()]
                    > table.indices[best][upcoming[best].unwrap()]
                {
                    best = i;
                }
            }
            assert_eq!(table.select(&upcoming).unwrap(), best);
        }
    }

    proptest! {
        #[test]
        fn indices_bounded_and_ordered(seed in 0u64..10_000, c in 2usize..7, beta in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_chain(&mut rng, c);
            let r: Vec<f64> = (0..c).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = gittins_compute(&p, &r, beta).unwrap();
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for &v in &g.indices {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
            for w in g.ordering.windows(2) {
                prop_assert!(g.indices[w[0]] >= g.indices[w[1]] - 1e-12);
            }
        }
    }
}
