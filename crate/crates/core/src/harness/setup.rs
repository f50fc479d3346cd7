use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{DataSource, ExperimentConfig, MdpSolver, SyntheticConfig};
use super::HarnessError;
use crate::data::{
    block_assignment, load_csv, load_idx, make_synthetic, split_tasks, ClassGaussian, CsvSchema,
    SyntheticSpec, SyntheticTask, TaskSubsets,
};
use crate::learner::{Hyperparams, ModelParams};
use crate::markov::{estimate_transitions, LabelSequence, TransitionMatrix};
use crate::numerics::Matrix;
use crate::reward::{probe_reward_table, probe_task_rewards};
use crate::schedulers::{
    CyclicScheduler, GittinsScheduler, GittinsTable, MdpPolicy, MdpScheduler, RandomScheduler,
    Scheduler, SchedulerKind, UcbState, LP_STATE_CAP,
};

use super::artifacts::{MdpArtifact, Precomputed};

/// RNG stream of the initial model weights.
const INIT_STREAM: u64 = 1 << 32;
/// RNG stream of the random scheduler.
const RANDOM_STREAM: u64 = (1 << 32) + 1;

/// Generator spec for a synthetic config.
///
/// Task `i` keeps its label with probability `diagonal[i]` and otherwise
/// jumps uniformly to another class. Class `c` has mean `s·e_{c mod d}`,
/// negated when `c ≥ d`, where `s` is the separation; task `i` adds
/// isotropic noise of standard deviation `noise[i]`.
pub fn synthetic_spec(s: &SyntheticConfig, run_seed: u64) -> Result<SyntheticSpec, HarnessError> {
    let pick = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    let c = s.classes;
    let mut tasks = Vec::with_capacity(s.tasks);
    for i in 0..s.tasks {
        let d = pick(&s.diagonal, i);
        let off = (1.0 - d) / (c - 1) as f64;
        let data: Vec<f64> = (0..c * c)
            .map(|k| if k / c == k % c { d } else { off })
            .collect();
        let transitions = TransitionMatrix::new(
            Matrix::new(c, c, data).map_err(crate::markov::MarkovError::from)?,
        )?;
        let gaussians = (0..c)
            .map(|k| {
                let mut mean = vec![0.0; s.dim];
                let sign = if (k / s.dim).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                mean[k % s.dim] = sign * s.separation;
                ClassGaussian {
                    mean,
                    std: pick(&s.noise, i),
                }
            })
            .collect();
        tasks.push(SyntheticTask {
            transitions,
            gaussians,
        });
    }
    Ok(SyntheticSpec {
        classes: c,
        dim: s.dim,
        tasks,
        train_per_task: s.train,
        val_per_task: s.val,
        seed: s.seed.unwrap_or(run_seed),
    })
}

/// Task subsets for the configured data source.
pub fn build_subsets(cfg: &ExperimentConfig) -> Result<TaskSubsets, HarnessError> {
    match &cfg.data {
        DataSource::Synthetic(s) => Ok(make_synthetic(&synthetic_spec(s, cfg.seed)?)?.subsets),
        DataSource::Csv {
            path,
            label,
            features,
            task_column,
            tasks,
            val_fraction,
        } => {
            let schema = CsvSchema {
                feature_columns: features.clone(),
                label_column: label.clone(),
                task_column: task_column.clone(),
                label_vocabulary: None,
            };
            let loaded = load_csv(path, &schema)?;
            let assignment = loaded
                .tasks
                .unwrap_or_else(|| block_assignment(loaded.dataset.len(), *tasks));
            Ok(split_tasks(&loaded.dataset, &assignment, *val_fraction)?)
        }
        DataSource::Idx {
            images,
            labels,
            limit,
            tasks,
            val_fraction,
        } => {
            let mut ds = load_idx(images, labels)?;
            if let Some(n) = limit {
                let rows: Vec<usize> = (0..(*n).min(ds.len())).collect();
                ds = ds.select(&rows);
            }
            let assignment = block_assignment(ds.len(), *tasks);
            Ok(split_tasks(&ds, &assignment, *val_fraction)?)
        }
    }
}

pub fn initial_hyperparams(
    cfg: &ExperimentConfig,
    subsets: &TaskSubsets,
) -> Result<Hyperparams, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INIT_STREAM);
    let init = ModelParams::random(
        cfg.architecture,
        subsets.dim(),
        subsets.classes(),
        cfg.init_std,
        &mut rng,
    )?;
    Ok(Hyperparams::new(init, cfg.inner_step)?)
}

/// Each task's transition matrix over all classes, estimated from the label
/// order of its training slice.
pub fn estimate_task_transitions(
    subsets: &TaskSubsets,
) -> Result<Vec<TransitionMatrix>, HarnessError> {
    subsets
        .tasks
        .iter()
        .map(|t| {
            let seq = LabelSequence::new(t.train.labels().to_vec(), subsets.classes())?;
            Ok(estimate_transitions(&seq)?.probs)
        })
        .collect()
}

/// Builds the configured scheduler, running its offline computations, and
/// returns them alongside.
pub fn build_scheduler(
    cfg: &ExperimentConfig,
    subsets: &TaskSubsets,
    hyper: &Hyperparams,
) -> Result<(Box<dyn Scheduler>, Precomputed), HarnessError> {
    let mut pre = Precomputed::default();
    let scheduler: Box<dyn Scheduler> = match cfg.scheduler {
        SchedulerKind::Cyclic => Box::new(CyclicScheduler::new()),
        SchedulerKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(RANDOM_STREAM);
            Box::new(RandomScheduler::new(rand::Rng::random(&mut rng)))
        }
        SchedulerKind::Ucb => {
            let probe =
                probe_task_rewards(&hyper.init, subsets, hyper.inner_step(), cfg.batch_size)?;
            let state = UcbState::new(&probe, cfg.ucb_u, cfg.xi)?;
            pre.task_rewards = Some(probe);
            Box::new(state)
        }
        SchedulerKind::Gittins => {
            let table = probe_reward_table(&hyper.init, subsets, hyper.inner_step())?;
            let transitions = estimate_task_transitions(subsets)?;
            let gittins = GittinsTable::compute(&transitions, &table, cfg.beta)?;
            pre.reward_table = Some(table);
            pre.transitions = Some(transitions);
            pre.gittins = Some(gittins.clone());
            Box::new(GittinsScheduler { table: gittins })
        }
        SchedulerKind::Mdp => {
            let table = probe_reward_table(&hyper.init, subsets, hyper.inner_step())?;
            let transitions = estimate_task_transitions(subsets)?;
            let (policy, artifact) = solve_mdp(cfg, &transitions, &table)?;
            pre.reward_table = Some(table);
            pre.transitions = Some(transitions);
            pre.mdp = Some(artifact);
            Box::new(MdpScheduler { policy })
        }
    };
    Ok((scheduler, pre))
}

/// Builds and solves the joint label MDP. The LP path falls back to value
/// iteration above the LP state cap.
pub(crate) fn solve_mdp(
    cfg: &ExperimentConfig,
    transitions: &[TransitionMatrix],
    table: &crate::reward::RewardTable,
) -> Result<(MdpPolicy, MdpArtifact), HarnessError> {
    let mut policy = MdpPolicy::build(transitions, table, cfg.gamma, cfg.mdp_state_cap)?;
    let use_lp = cfg.mdp_solver == MdpSolver::Lp && policy.states() <= LP_STATE_CAP;
    if cfg.mdp_solver == MdpSolver::Lp && !use_lp {
        log::warn!(
            "{} joint states exceed the LP cap {LP_STATE_CAP}; using value iteration",
            policy.states()
        );
    }
    let (solver, iterations) = if use_lp {
        let report = policy.solve_lp()?;
        (MdpSolver::Lp, Some(report.iterations))
    } else {
        policy.solve_value_iteration(1e-10);
        (MdpSolver::ValueIteration, None)
    };
    let values = policy.values.clone().expect("solved above");
    let artifact = MdpArtifact {
        gamma: cfg.gamma,
        state_dims: policy.state_dims.clone(),
        solver,
        lp_iterations: iterations,
        bellman_residual: policy.mdp.bellman_residual(&values),
        values,
    };
    Ok((policy, artifact))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spec_layout() {
        let s = SyntheticConfig {
            classes: 6,
            dim: 3,
            diagonal: vec![0.7],
            ..SyntheticConfig::default()
        };
        let spec = synthetic_spec(&s, 11).unwrap();
        assert_eq!(spec.seed, 11);
        assert_eq!(spec.tasks.len(), 3);
        let p = &spec.tasks[0].transitions;
        assert!((p.get(2, 2) - 0.7).abs() < 1e-15 && (p.get(2, 0) - 0.06).abs() < 1e-15);
        assert_eq!(spec.tasks[0].gaussians[1].mean, vec![0.0, 3.0, 0.0]);
        assert_eq!(spec.tasks[0].gaussians[4].mean, vec![0.0, -3.0, 0.0]);
    }

    #[test]
    fn init_depends_on_seed_only() {
        let cfg =
            ExperimentConfig::parse("data = \"synthetic\"\nscheduler = \"cyclic\"\nseed = 3\n")
                .unwrap();
        let subsets = build_subsets(&cfg).unwrap();
        let a = initial_hyperparams(&cfg, &subsets).unwrap();
        let b = initial_hyperparams(&cfg, &subsets).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 4;
        assert_ne!(initial_hyperparams(&other, &subsets).unwrap(), a);
    }

    #[test]
    fn every_kind_builds() {
        for kind in SchedulerKind::ALL {
            let mut cfg =
                ExperimentConfig::parse("data = \"synthetic\"\nscheduler = \"cyclic\"\nseed = 1\n")
                    .unwrap();
            cfg.scheduler = kind;
            let subsets = build_subsets(&cfg).unwrap();
            let hyper = initial_hyperparams(&cfg, &subsets).unwrap();
            let (mut s, _) = build_scheduler(&cfg, &subsets, &hyper).unwrap();
            assert_eq!(s.kind(), kind);
            assert!(s.select(&subsets.upcoming()).unwrap() < 3);
        }
    }
}
