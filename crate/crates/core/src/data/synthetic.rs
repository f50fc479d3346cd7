use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, TaskSubset, TaskSubsets};
use crate::markov::{generate_with_rng, TransitionMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub mean: Vec<f64>,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    /// Label dynamics; its size is this task's class count.
    pub transitions: TransitionMatrix,
    /// One isotropic Gaussian per class of this task.
    pub gaussians: Vec<ClassGaussian>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Global class count shared by the classifier.
    pub classes: usize,
    pub dim: usize,
    pub tasks: Vec<SyntheticTask>,
    pub train_per_task: usize,
    pub val_per_task: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub subsets: TaskSubsets,
    /// The matrices the label streams were drawn from.
    pub true_transitions: Vec<TransitionMatrix>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.tasks.is_empty() {
            return Err(DataError::BadSpec("no tasks".into()));
        }
        if self.dim == 0 || self.classes < 2 || self.train_per_task == 0 {
            return Err(DataError::BadSpec(
                "dim, classes and train size must be positive".into(),
            ));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let c = t.transitions.states();
            if c > self.classes {
                return Err(DataError::BadSpec(format!(
                    "task {i} has {c} classes, more than {}",
                    self.classes
                )));
            }
            if t.gaussians.len() != c {
                return Err(DataError::BadSpec(format!(
                    "task {i}: {} gaussians for {c} classes",
                    t.gaussians.len()
                )));
            }
            for g in &t.gaussians {
                if g.mean.len() != self.dim {
                    return Err(DataError::BadSpec(format!(
                        "task {i}: mean of length {}",
                        g.mean.len()
                    )));
                }
                if !(g.std > 0.0 && g.std.is_finite()) {
                    return Err(DataError::BadSpec(format!(
                        "task {i}: std {} must be positive",
                        g.std
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draws every task's label stream from its chain and features from the
/// matching class Gaussian. The last `val_per_task` examples of each task
/// form its validation tail.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData, DataError> {
    spec.validate()?;
    let len = spec.train_per_task + spec.val_per_task;
    let mut tasks = Vec::with_capacity(spec.tasks.len());
    let mut pooled_features = Vec::new();
    let mut pooled_labels = Vec::new();

    for (i, task) in spec.tasks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64 + 1);
        let c = task.transitions.states();
        let init = rng.random_range(0..c);
        let labels = generate_with_rng(&task.transitions, init, len, &mut rng)?
            .labels()
            .to_vec();

        let mut features = Vec::with_capacity(len * spec.dim);
        for &y in &labels {
            let g = &task.gaussians[y];
            for &m in &g.mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                features.push(m + g.std * z);
            }
        }
        let split = spec.train_per_task * spec.dim;
        let train = Dataset::new(
            features[..split].to_vec(),
            spec.dim,
            labels[..spec.train_per_task].to_vec(),
            spec.classes,
            format!("synthetic task {i}"),
        )?;
        let val = Dataset::new(
            features[split..].to_vec(),
            spec.dim,
            labels[spec.train_per_task..].to_vec(),
            spec.classes,
            format!("synthetic task {i} validation"),
        )?;
        pooled_features.extend_from_slice(&features[split..]);
        pooled_labels.extend_from_slice(&labels[spec.train_per_task..]);
        tasks.push(TaskSubset::new(i, train, val, (0..c).collect()));
    }

    let pooled_val = Dataset::new(
        pooled_features,
        spec.dim,
        pooled_labels,
        spec.classes,
        "synthetic pooled validation",
    )?;
    if pooled_val.is_empty() {
        return Err(DataError::EmptyValidation);
    }
    Ok(SyntheticData {
        subsets: TaskSubsets { tasks, pooled_val },
        true_transitions: spec.tasks.iter().map(|t| t.transitions.clone()).collect(),
    })
}
