use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MdpSolver};
use super::setup::{build_subsets, estimate_task_transitions, initial_hyperparams, solve_mdp};
use super::{ensure_dir, write_json, HarnessError};
use crate::markov::TransitionMatrix;
use crate::reward::{probe_reward_table, probe_task_rewards, RewardTable};
use crate::schedulers::{GittinsTable, SchedulerError};

/// Solved joint label MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpArtifact {
    pub gamma: f64,
    pub state_dims: Vec<usize>,
    pub solver: MdpSolver,
    pub lp_iterations: Option<usize>,
    pub bellman_residual: f64,
    /// Optimal value of each joint state, row-major over the task labels.
    pub values: Vec<f64>,
}

/// Offline computations that seed a scheduler.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Precomputed {
    pub task_rewards: Option<Vec<f64>>,
    pub reward_table: Option<RewardTable>,
    pub transitions: Option<Vec<TransitionMatrix>>,
    pub gittins: Option<GittinsTable>,
    pub mdp: Option<MdpArtifact>,
    /// Why the MDP artifact is absent, when it is.
    pub mdp_skipped: Option<String>,
}

/// Reward probes of the initial model only: per-task rewards for UCB and the
/// per-(task, class) table for Gittins and MDP.
pub fn probe(cfg: &ExperimentConfig) -> Result<Precomputed, HarnessError> {
    let subsets = build_subsets(cfg)?;
    let hyper = initial_hyperparams(cfg, &subsets)?;
    let delta = hyper.inner_step();
    Ok(Precomputed {
        task_rewards: Some(probe_task_rewards(
            &hyper.init,
            &subsets,
            delta,
            cfg.batch_size,
        )?),
        reward_table: Some(probe_reward_table(&hyper.init, &subsets, delta)?),
        ..Precomputed::default()
    })
}

/// Every offline artifact for the configured data and initial model. An
/// MDP whose state space exceeds the cap is skipped with a reason.
pub fn precompute(cfg: &ExperimentConfig) -> Result<Precomputed, HarnessError> {
    let subsets = build_subsets(cfg)?;
    let hyper = initial_hyperparams(cfg, &subsets)?;
    let delta = hyper.inner_step();
    let table = probe_reward_table(&hyper.init, &subsets, delta)?;
    let transitions = estimate_task_transitions(&subsets)?;
    let gittins = GittinsTable::compute(&transitions, &table, cfg.beta)?;
    let (mdp, mdp_skipped) = match solve_mdp(cfg, &transitions, &table) {
        Ok((_, artifact)) => (Some(artifact), None),
        Err(HarnessError::Scheduler(e @ SchedulerError::StateSpaceTooLarge { .. })) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(Precomputed {
        task_rewards: Some(probe_task_rewards(
            &hyper.init,
            &subsets,
            delta,
            cfg.batch_size,
        )?),
        reward_table: Some(table),
        transitions: Some(transitions),
        gittins: Some(gittins),
        mdp,
        mdp_skipped,
    })
}

/// One JSON file per present artifact.
pub fn write_precomputed(dir: &Path, pre: &Precomputed) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    if let Some(v) = &pre.task_rewards {
        write_json(&dir.join("task_rewards.json"), v)?;
    }
    if let Some(v) = &pre.reward_table {
        write_json(&dir.join("reward_table.json"), v)?;
    }
    if let Some(v) = &pre.transitions {
        write_json(&dir.join("transitions.json"), v)?;
    }
    if let Some(v) = &pre.gittins {
        write_json(&dir.join("gittins.json"), v)?;
    }
    if let Some(v) = &pre.mdp {
        write_json(&dir.join("mdp.json"), v)?;
    }
    Ok(())
}
