use serde::{Deserialize, Serialize};

use super::{check_discount, masked_argmax, Scheduler, SchedulerError, SchedulerKind};
use crate::markov::TransitionMatrix;
use crate::numerics::simplex::{LinearProgram, SimplexOptions};
use crate::numerics::{kron_capped, Matrix, DEFAULT_KRON_CAP};
use crate::reward::RewardTable;

/// Default cap on the joint label state space.
pub const DEFAULT_STATE_CAP: usize = 4096;

/// Largest state space the dense linear program is built for.
pub const LP_STATE_CAP: usize = 1024;

/// Tolerated violation of any LP inequality by a returned value vector.
const FEASIBILITY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-8;

/// Discounted MDP with sparse transition rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    pub gamma: f64,
    /// `rewards[s][a]`.
    pub rewards: Vec<Vec<f64>>,
    /// `transitions[a][s]`: successor states with positive probability.
    pub transitions: Vec<Vec<Vec<(usize, f64)>>>,
}

/// Diagnostics of an LP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
    /// Largest `r(s,a) + γ·Σ P V − V(s)` over all pairs, clipped at zero.
    pub max_violation: f64,
    pub bellman_residual: f64,
}

impl TabularMdp {
    pub fn new(
        gamma: f64,
        rewards: Vec<Vec<f64>>,
        transitions: Vec<Vec<Vec<(usize, f64)>>>,
    ) -> Result<Self, SchedulerError> {
        check_discount(gamma)?;
        let s = rewards.len();
        let a = transitions.len();
        if s == 0 || a == 0 {
            return Err(SchedulerError::ShapeMismatch("empty MDP".into()));
        }
        if rewards.iter().any(|row| row.len() != a) {
            return Err(SchedulerError::ShapeMismatch(format!(
                "reward rows must have {a} actions"
            )));
        }
        for (ai, rows) in transitions.iter().enumerate() {
            if rows.len() != s {
                return Err(SchedulerError::ShapeMismatch(format!(
                    "action {ai} has {} rows",
                    rows.len()
                )));
            }
            for (si, row) in rows.iter().enumerate() {
                let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                if row.iter().any(|&(j, p)| j >= s || p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(SchedulerError::Markov(
                        crate::markov::MarkovError::NotStochastic { row: si, sum },
                    ));
                }
            }
        }
        Ok(Self {
            gamma,
            rewards,
            transitions,
        })
    }

    /// From dense per-action matrices.
    pub fn from_dense(
        gamma: f64,
        rewards: Vec<Vec<f64>>,
        transitions: &[Matrix],
    ) -> Result<Self, SchedulerError> {
        let sparse = transitions
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| {
                        m.row(i)
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p != 0.0)
                            .map(|(j, &p)| (j, p))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(gamma, rewards, sparse)
    }

    pub fn states(&self) -> usize {
        self.rewards.len()
    }

    pub fn actions(&self) -> usize {
        self.transitions.len()
    }

    /// `r(s,a) + γ·Σ_{s'} P^a(s,s') V(s')`.
    pub fn q_value(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        let ev: f64 = self.transitions[a][s].iter().map(|&(j, p)| p * v[j]).sum();
        self.rewards[s][a] + self.gamma * ev
    }

    pub fn backup(&self, v: &[f64]) -> Vec<f64> {
        (0..self.states())
            .map(|s| {
                (0..self.actions())
                    .map(|a| self.q_value(s, a, v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    /// `max_s |V(s) − max_a Q(s,a)|`.
    pub fn bellman_residual(&self, v: &[f64]) -> f64 {
        self.backup(v)
            .iter()
            .zip(v)
            .fold(0.0_f64, |m, (b, x)| m.max((b - x).abs()))
    }

    /// Largest violation of `V(s) ≥ Q(s,a)`, zero when feasible.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        self.backup(v)
            .iter()
            .zip(v)
            .fold(0.0_f64, |m, (b, x)| m.max(b - x))
    }

    /// Greedy action at `s` among allowed actions; ties go to the lowest index.
    pub fn greedy(&self, s: usize, v: &[f64], allowed: &[bool]) -> Result<usize, SchedulerError> {
        let q: Vec<f64> = (0..self.actions()).map(|a| self.q_value(s, a, v)).collect();
        masked_argmax(&q, allowed)
    }

    /// Iterates `V ← max_a Q(·,a)` from zero until the sup change is at most
    /// `tol·(1−γ)/(2γ)`, which bounds the distance to the fixed point by `tol`.
    pub fn value_iteration(&self, tol: f64) -> Vec<f64> {
        let stop = tol * (1.0 - self.gamma) / (2.0 * self.gamma);
        let mut v = vec![0.0; self.states()];
        loop {
            let next = self.backup(&v);
            let change = next
                .iter()
                .zip(&v)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            v = next;
            if change <= stop {
                return v;
            }
        }
    }

    /// Optimal values from the Bellman linear program.
    ///
    /// Minimising `Σ V(s)` subject to `V(s) ≥ Q(s,a)` is solved through its
    /// dual: maximise `Σ r(s,a) x(s,a)` subject to
    /// `Σ_a x(s',a) − γ Σ_{s,a} P^a(s,s') x(s,a) = 1`, `x ≥ 0`. Every basic
    /// feasible solution is a deterministic policy with a strictly positive
    /// occupancy, so the simplex starts from the myopic policy without a
    /// phase-one and never pivots degenerately. The optimal simplex
    /// multipliers are the optimal values.
    pub fn solve_lp(&self) -> Result<LpReport, SchedulerError> {
        let s_n = self.states();
        let a_n = self.actions();
        if s_n > LP_STATE_CAP {
            return Err(SchedulerError::StateSpaceTooLarge {
                states: s_n,
                cap: LP_STATE_CAP,
            });
        }
        let mut a = Matrix::zeros(s_n, s_n * a_n);
        let mut c = vec![0.0; s_n * a_n];
        for s in 0..s_n {
            for act in 0..a_n {
                let col = s * a_n + act;
                c[col] = self.rewards[s][act];
                a.set(s, col, a.get(s, col) + 1.0);
                for &(j, p) in &self.transitions[act][s] {
                    a.set(j, col, a.get(j, col) - self.gamma * p);
                }
            }
        }
        let lp = LinearProgram::new(a, vec![1.0; s_n], c)?;
        let basis: Vec<usize> = (0..s_n)
            .map(|s| {
                let act =
                    crate::numerics::argmax_tiebreak(&self.rewards[s]).expect("non-empty row");
                s * a_n + act
            })
            .collect();
        let sol = lp.maximize_from_basis(basis, SimplexOptions::default())?;
        let values = sol.duals;
        let mut policy = vec![0; s_n];
        for &col in &sol.basis {
            policy[col / a_n] = col % a_n;
        }
        let report = LpReport {
            max_violation: self.max_violation(&values),
            bellman_residual: self.bellman_residual(&values),
            values,
            policy,
            iterations: sol.iterations,
        };
        if report.max_violation > FEASIBILITY_TOL || report.bellman_residual > RESIDUAL_TOL {
            return Err(SchedulerError::CheckFailed(format!(
                "violation {:e}, residual {:e}",
                report.max_violation, report.bellman_residual
            )));
        }
        Ok(report)
    }
}

/// The joint label MDP over tasks.
///
/// States are tuples `(c₀, …, c_{N−1})` of upcoming labels, enumerated
/// row-major with `c₀` most significant. Action `i` advances only task `i`'s
/// label through its chain `Pⁱ` and earns `rewards[i][cᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpPolicy {
    pub gamma: f64,
    pub state_dims: Vec<usize>,
    pub mdp: TabularMdp,
    pub values: Option<Vec<f64>>,
}

impl MdpPolicy {
    pub fn build(
        transitions: &[TransitionMatrix],
        rewards: &RewardTable,
        gamma: f64,
        cap: usize,
    ) -> Result<Self, SchedulerError> {
        check_discount(gamma)?;
        let n = transitions.len();
        if n == 0 || rewards.tasks() != n {
            return Err(SchedulerError::ShapeMismatch(format!(
                "{n} transition matrices for {} reward rows",
                rewards.tasks()
            )));
        }
        let state_dims: Vec<usize> = transitions.iter().map(TransitionMatrix::states).collect();
        for (i, (&d, row)) in state_dims.iter().zip(&rewards.values).enumerate() {
            if row.len() < d {
                return Err(SchedulerError::ShapeMismatch(format!(
                    "task {i}: {} rewards for {d} classes",
                    row.len()
                )));
            }
        }
        let states = state_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d).filter(|&v| v <= cap))
            .ok_or(SchedulerError::StateSpaceTooLarge {
                states: state_dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
                cap,
            })?;

        let strides = strides(&state_dims);
        let mut reward_rows = Vec::with_capacity(states);
        let mut trans: Vec<Vec<Vec<(usize, f64)>>> = vec![Vec::with_capacity(states); n];
        let mut labels = vec![0usize; n];
        for s in 0..states {
            decode_into(s, &state_dims, &mut labels);
            reward_rows.push((0..n).map(|i| rewards.values[i][labels[i]]).collect());
            for i in 0..n {
                let base = s - labels[i] * strides[i];
                let row = transitions[i]
                    .row(labels[i])
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(c, &p)| (base + c * strides[i], p))
                    .collect();
                trans[i].push(row);
            }
        }
        let mdp = TabularMdp::new(gamma, reward_rows, trans)?;
        Ok(Self {
            gamma,
            state_dims,
            mdp,
            values: None,
        })
    }

    pub fn states(&self) -> usize {
        self.mdp.states()
    }

    /// Row-major index of a label tuple.
    pub fn encode(&self, labels: &[usize]) -> Result<usize, SchedulerError> {
        if labels.len() != self.state_dims.len() {
            return Err(SchedulerError::ShapeMismatch(format!(
                "{} labels for {} tasks",
                labels.len(),
                self.state_dims.len()
            )));
        }
        let mut s = 0;
        for (i, (&c, &d)) in labels.iter().zip(&self.state_dims).enumerate() {
            if c >= d {
                return Err(SchedulerError::LabelOutOfRange {
                    task: i,
                    label: c,
                    classes: d,
                });
            }
            s = s * d + c;
        }
        Ok(s)
    }

    pub fn decode(&self, s: usize) -> Vec<usize> {
        let mut labels = vec![0; self.state_dims.len()];
        decode_into(s, &self.state_dims, &mut labels);
        labels
    }

    /// Dense aggregate transition of action `i`: `I ⊗ … ⊗ Pⁱ ⊗ … ⊗ I` with
    /// `Pⁱ` in slot `i`.
    pub fn aggregate_transition(
        &self,
        i: usize,
        transitions: &[TransitionMatrix],
    ) -> Result<Matrix, SchedulerError> {
        let mut m = Matrix::identity(1);
        for (slot, p) in transitions.iter().enumerate() {
            let factor = if slot == i {
                p.matrix().clone()
            } else {
                Matrix::identity(p.states())
            };
            m = kron_capped(&m, &factor, DEFAULT_KRON_CAP)?;
        }
        Ok(m)
    }

    pub fn solve_lp(&mut self) -> Result<LpReport, SchedulerError> {
        let report = self.mdp.solve_lp()?;
        self.values = Some(report.values.clone());
        Ok(report)
    }

    pub fn solve_value_iteration(&mut self, tol: f64) -> Vec<f64> {
        let v = self.mdp.value_iteration(tol);
        self.values = Some(v.clone());
        v
    }

    /// Greedy task at the state of upcoming labels.
    ///
    /// An exhausted task can no longer be chosen; its slot of the state is
    /// encoded as label 0.
    pub fn select(&self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        let v = self.values.as_ref().ok_or(SchedulerError::NotSolved)?;
        let labels: Vec<usize> = upcoming.iter().map(|u| u.unwrap_or(0)).collect();
        let s = self.encode(&labels)?;
        self.mdp.greedy(s, v, &super::availability(upcoming))
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * dims[i + 1];
    }
    out
}

fn decode_into(mut s: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = s % dims[i];
        s /= dims[i];
    }
}

#[derive(Debug, Clone)]
pub struct MdpScheduler {
    pub policy: MdpPolicy,
}

impl Scheduler for MdpScheduler {
    fn kind(&self) -> SchedulerKind {
        SchedulerKind::Mdp
    }

    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        self.policy.select(upcoming)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n)
                    .map(|_| {
                        if rng.random_bool(0.4) {
                            0.0
                        } else {
                            rng.random::<f64>()
                        }
                    })
                    .collect();
                let s: f64 = raw.iter().sum();
                if s == 0.0 {
                    let mut e = vec![0.0; n];
                    e[rng.random_range(0..n)] = 1.0;
                    e
                } else {
                    raw.iter().map(|v| v / s).collect()
                }
            })
            .collect()
    }

    fn random_mdp(rng: &mut ChaCha8Rng, s: usize, a: usize) -> TabularMdp {
        let rewards = (0..s)
            .map(|_| (0..a).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mats: Vec<Matrix> = (0..a)
            .map(|_| Matrix::from_rows(&random_stochastic(rng, s)).unwrap())
            .collect();
        TabularMdp::from_dense(0.9, rewards, &mats).unwrap()
    }

    #[test]
    fn single_state_geometric_value() {
        let m = TabularMdp::new(0.9, vec![vec![1.0]], vec![vec![vec![(0, 1.0)]]]).unwrap();
        let lp = m.solve_lp().unwrap();
        assert!((lp.values[0] - 10.0).abs() < 1e-12);
        assert!((m.value_iteration(1e-9)[0] - 10.0).abs() <= 1e-9);
    }

    #[test]
    fn zero_rewards_zero_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = random_mdp(&mut rng, 5, 2);
        m.rewards.iter_mut().flatten().for_each(|r| *r = 0.0);
        assert!(m.solve_lp().unwrap().values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn teleport_fixed_point() {
        // state 1 is absorbing with reward 1; from state 0, action 0 stays
        // with reward 0.5 and action 1 jumps to state 1 with reward 0
        let m = TabularMdp::new(
            0.9,
            vec![vec![0.5, 0.0], vec![1.0, 1.0]],
            vec![
                vec![vec![(0, 1.0)], vec![(1, 1.0)]],
                vec![vec![(1, 1.0)], vec![(1, 1.0)]],
            ],
        )
        .unwrap();
        // V1 = 10; V0 = max(0.5 + 0.9 V0, 0.9·10) = max(5, 9) = 9
        let lp = m.solve_lp().unwrap();
        assert!((lp.values[0] - 9.0).abs() < 1e-12 && (lp.values[1] - 10.0).abs() < 1e-12);
        assert_eq!(lp.policy[0], 1);
        let vi = m.value_iteration(1e-10);
        assert!((vi[0] - 9.0).abs() <= 1e-10 && (vi[1] - 10.0).abs() <= 1e-10);
    }

    #[test]
    fn lp_agrees_with_value_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let s = rng.random_range(1..=40);
            let a = rng.random_range(1..=4);
            let m = random_mdp(&mut rng, s, a);
            let lp = m.solve_lp().unwrap();
            assert!(lp.max_violation <= 1e-9 && lp.bellman_residual <= 1e-8);
            let vi = m.value_iteration(1e-9);
            assert!(m.bellman_residual(&vi) <= 1e-8);
            for (x, y) in lp.values.iter().zip(&vi) {
                assert!((x - y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(TabularMdp::new(0.9, vec![vec![1.0]], vec![vec![vec![(0, 0.5)]]]).is_err());
        assert!(TabularMdp::new(1.0, vec![vec![1.0]], vec![vec![vec![(0, 1.0)]]]).is_err());
    }

    fn swap() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn single_task_aggregate_is_the_chain() {
        let p = crate::markov::weather_reference_matrix();
        let rewards = RewardTable {
            values: vec![vec![0.1, 0.2, 0.3, 0.4]],
        };
        let policy =
            MdpPolicy::build(std::slice::from_ref(&p), &rewards, 0.9, DEFAULT_STATE_CAP).unwrap();
        let agg = policy
            .aggregate_transition(0, std::slice::from_ref(&p))
            .unwrap();
        assert_eq!(agg, *p.matrix());
        for s in 0..4 {
            let row: Vec<(usize, f64)> = p
                .row(s)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect();
            assert_eq!(policy.mdp.transitions[0][s], row);
        }
    }

    #[test]
    fn two_task_permutation_action() {
        let ps = vec![swap(), TransitionMatrix::uniform(2)];
        let rewards = RewardTable {
            values: vec![vec![0.0, 1.0], vec![0.5, 0.5]],
        };
        let policy = MdpPolicy::build(&ps, &rewards, 0.9, DEFAULT_STATE_CAP).unwrap();
        let agg = policy.aggregate_transition(0, &ps).unwrap();
        for s in 0..4 {
            let l = policy.decode(s);
            let target = policy.encode(&[1 - l[0], l[1]]).unwrap();
            for t in 0..4 {
                assert_eq!(agg.get(s, t), if t == target { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn sparse_rows_match_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = [2usize, 3, 2];
        let ps: Vec<TransitionMatrix> = dims
            .iter()
            .map(|&d| TransitionMatrix::from_rows(&random_stochastic(&mut rng, d)).unwrap())
            .collect();
        let rewards = RewardTable {
            values: (0..3)
                .map(|_| (0..3).map(|_| rng.random()).collect())
                .collect(),
        };
        let policy = MdpPolicy::build(&ps, &rewards, 0.9, DEFAULT_STATE_CAP).unwrap();
        for i in 0..3 {
            let agg = policy.aggregate_transition(i, &ps).unwrap();
            assert!(agg.max_row_sum_deviation() <= 1e-12);
            for s in 0..12 {
                let mut dense = [0.0; 12];
                for &(j, p) in &policy.mdp.transitions[i][s] {
                    dense[j] += p;
                }
                for (t, &d) in dense.iter().enumerate() {
                    assert!((agg.get(s, t) - d).abs() < 1e-15);
                }
                let l = policy.decode(s);
                assert_eq!(policy.mdp.rewards[s][i], rewards.values[i][l[i]]);
            }
        }
    }

    #[test]
    fn state_cap() {
        let ps = vec![TransitionMatrix::uniform(20); 3];
        let rewards = RewardTable {
            values: vec![vec![0.0; 20]; 3],
        };
        assert!(matches!(
            MdpPolicy::build(&ps, &rewards, 0.9, DEFAULT_STATE_CAP),
            Err(SchedulerError::StateSpaceTooLarge {
                states: 8000,
                cap: 4096
            })
        ));
    }

    #[test]
    fn select_matches_brute_force_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ps: Vec<TransitionMatrix> = (0..2)
            .map(|_| TransitionMatrix::from_rows(&random_stochastic(&mut rng, 2)).unwrap())
            .collect();
        let rewards = RewardTable {
            values: (0..2)
                .map(|_| (0..2).map(|_| rng.random()).collect())
                .collect(),
        };
        let mut policy = MdpPolicy::build(&ps, &rewards, 0.9, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(
            policy.select(&[Some(0), Some(0)]),
            Err(SchedulerError::NotSolved)
        );
        policy.solve_lp().unwrap();
        let oracle = policy.mdp.value_iteration(1e-12);
        for c0 in 0..2 {
            for c1 in 0..2 {
                let s = c0 * 2 + c1;
                let q: Vec<f64> = (0..2)
                    .map(|i| {
                        let agg = policy.aggregate_transition(i, &ps).unwrap();
                        let ev: f64 = (0..4).map(|t| agg.get(s, t) * oracle[t]).sum();
                        rewards.values[i][[c0, c1][i]] + 0.9 * ev
                    })
                    .collect();
                let expected = if q[1] > q[0] { 1 } else { 0 };
                assert_eq!(policy.select(&[Some(c0), Some(c1)]).unwrap(), expected);
            }
        }
        assert_eq!(policy.select(&[None, Some(1)]).unwrap(), 1);
    }

    #[test]
    fn dominant_reward_with_identical_transitions() {
        let ps = vec![TransitionMatrix::uniform(2), TransitionMatrix::uniform(2)];
        let rewards = RewardTable {
            values: vec![vec![0.9, 0.9], vec![0.1, 0.1]],
        };
        let mut policy = MdpPolicy::build(&ps, &rewards, 0.9, DEFAULT_STATE_CAP).unwrap();
        policy.solve_value_iteration(1e-10);
        for s in 0..4 {
            let l = policy.decode(s);
            assert_eq!(policy.select(&[Some(l[0]), Some(l[1])]).unwrap(), 0);
        }
    }
}
