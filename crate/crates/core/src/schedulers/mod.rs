//! Task-selection policies behind one interface: UCB over tasks, Gittins
//! indices over each task's upcoming label, a greedy policy for the joint
//! label MDP, and cyclic / uniform random baselines.
//!
//! Every policy sees only the upcoming label of each task (`None` once the
//! task is exhausted) and never selects an exhausted task.

mod baseline;
mod gittins;
mod mdp;
mod regret;
mod ucb;

pub use baseline::{CyclicScheduler, RandomScheduler};
pub use gittins::{gittins_compute, gittins_oracle, GittinsIndex, GittinsScheduler, GittinsTable};
pub use mdp::{LpReport, MdpPolicy, MdpScheduler, TabularMdp, DEFAULT_STATE_CAP, LP_STATE_CAP};
pub use regret::regret_trace;
pub use ucb::{UcbState, DEFAULT_U, DEFAULT_XI};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::MarkovError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("every task is exhausted")]
    AllExhausted,
    #[error("task {0} is exhausted")]
    ExhaustedTask(usize),
    #[error("exploration factor must exceed 1, got {0}")]
    BadExploration(f64),
    #[error("discount must lie in (0, 1), got {0}")]
    BadDiscount(f64),
    #[error("joint state space of {states} states exceeds the cap {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },
    #[error("task {task}: label {label} out of range for {classes} classes")]
    LabelOutOfRange {
        task: usize,
        label: usize,
        classes: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("policy has not been solved")]
    NotSolved,
    #[error("unknown scheduler {0:?}")]
    UnknownKind(String),
    #[error("solution check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Cyclic,
    Random,
    Ucb,
    Gittins,
    Mdp,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Cyclic,
        SchedulerKind::Random,
        SchedulerKind::Ucb,
        SchedulerKind::Gittins,
        SchedulerKind::Mdp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Cyclic => "cyclic",
            SchedulerKind::Random => "random",
            SchedulerKind::Ucb => "ucb",
            SchedulerKind::Gittins => "gittins",
            SchedulerKind::Mdp => "mdp",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = SchedulerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| SchedulerError::UnknownKind(s.to_string()))
    }
}

/// A sequential task-selection policy.
pub trait Scheduler: Send {
    fn kind(&self) -> SchedulerKind;

    /// Chooses a task whose entry in `upcoming` is `Some`.
    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError>;

    /// Feeds back the reward of the last selection.
    fn observe(&mut self, _task: usize, _reward: f64) {}
}

/// Index of the largest score among available tasks; ties go to the lowest
/// index and NaN scores never win over a number.
pub(crate) fn masked_argmax(scores: &[f64], available: &[bool]) -> Result<usize, SchedulerError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (&s, &ok)) in scores.iter().zip(available).enumerate() {
        if !ok {
            continue;
        }
        match best {
            None => best = Some((i, s)),
            Some((_, b)) if s > b || (b.is_nan() && !s.is_nan()) => best = Some((i, s)),
            _ => {}
        }
    }
    best.map(|(i, _)| i).ok_or(SchedulerError::AllExhausted)
}

pub(crate) fn availability(upcoming: &[Option<usize>]) -> Vec<bool> {
    upcoming.iter().map(Option::is_some).collect()
}

pub(crate) fn check_discount(d: f64) -> Result<(), SchedulerError> {
    if d > 0.0 && d < 1.0 {
        Ok(())
    } else {
        Err(SchedulerError::BadDiscount(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in SchedulerKind::ALL {
            assert_eq!(k.as_str().parse::<SchedulerKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("thompson".parse::<SchedulerKind>().is_err());
        assert_eq!(
            " UCB ".parse::<SchedulerKind>().unwrap(),
            SchedulerKind::Ucb
        );
    }

    #[test]
    fn masked_argmax_rules() {
        assert_eq!(masked_argmax(&[1.0, 3.0, 3.0], &[true; 3]).unwrap(), 1);
        assert_eq!(
            masked_argmax(&[1.0, 3.0, 3.0], &[true, false, true]).unwrap(),
            2
        );
        assert_eq!(masked_argmax(&[f64::NAN, 0.5], &[true, true]).unwrap(), 1);
        assert_eq!(
            masked_argmax(&[1.0], &[false]),
            Err(SchedulerError::AllExhausted)
        );
    }
}
