use serde::{Deserialize, Serialize};

use super::{availability, masked_argmax, Scheduler, SchedulerError, SchedulerKind};

pub const DEFAULT_U: f64 = 2.0;
pub const DEFAULT_XI: f64 = 2.0;

/// Upper-confidence-bound state over tasks.
///
/// Invariant after [`UcbState::new`]: every visit count is at least 1 and
/// `t` equals the total number of observed rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbState {
    pub visits: Vec<u64>,
    pub means: Vec<f64>,
    pub u: f64,
    pub xi: f64,
    pub t: u64,
}

impl UcbState {
    /// One pseudo-visit per task with the probe reward as its mean.
    pub fn new(probe_rewards: &[f64], u: f64, xi: f64) -> Result<Self, SchedulerError> {
        if !(xi > 1.0) {
            return Err(SchedulerError::BadExploration(xi));
        }
        if probe_rewards.is_empty() {
            return Err(SchedulerError::ShapeMismatch("no tasks".into()));
        }
        Ok(Self {
            visits: vec![1; probe_rewards.len()],
            means: probe_rewards.to_vec(),
            u,
            xi,
            t: probe_rewards.len() as u64,
        })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    /// `μ[i] + U·√(ξ·ln t / V[i])`.
    pub fn scores(&self) -> Vec<f64> {
        let log_t = (self.t.max(1) as f64).ln();
        self.means
            .iter()
            .zip(&self.visits)
            .map(|(&m, &v)| m + self.u * (self.xi * log_t / v as f64).sqrt())
            .collect()
    }

    pub fn select_among(&self, available: &[bool]) -> Result<usize, SchedulerError> {
        masked_argmax(&self.scores(), available)
    }

    pub fn best(&self) -> usize {
        masked_argmax(&self.scores(), &vec![true; self.arms()]).expect("at least one arm")
    }

    pub fn update(&mut self, task: usize, reward: f64) {
        self.visits[task] += 1;
        let v = self.visits[task] as f64;
        self.means[task] += (reward - self.means[task]) / v;
        self.t += 1;
    }
}

impl Scheduler for UcbState {
    fn kind(&self) -> SchedulerKind {
        SchedulerKind::Ucb
    }

    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        if upcoming.len() != self.arms() {
            return Err(SchedulerError::ShapeMismatch(format!(
                "{} tasks for {} arms",
                upcoming.len(),
                self.arms()
            )));
        }
        self.select_among(&availability(upcoming))
    }

    fn observe(&mut self, task: usize, reward: f64) {
        self.update(task, reward);
    }
}
