//! Validation accuracy, the √t-scaled reward, and the per-(task, class)
//! probe table that seeds the Gittins and MDP schedulers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataView, TaskSubsets};
use crate::learner::{inner_sgd_step, LearnerError, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("validation set is empty")]
    EmptyValidationSet,
    #[error("task {task} has no training example of class {class}")]
    MissingClass { task: usize, class: usize },
    #[error("step index must be at least 1")]
    ZeroStep,
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// One observed reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSample {
    pub t: usize,
    pub accuracy: f64,
    pub scaled: f64,
}

impl RewardSample {
    pub fn new(t: usize, accuracy: f64) -> Result<Self, RewardError> {
        Ok(Self {
            t,
            accuracy,
            scaled: scaled_reward(t, accuracy)?,
        })
    }

    /// `√t · (1 − accuracy)`.
    pub fn sqrt_t_error(&self) -> f64 {
        (self.t as f64).sqrt() * (1.0 - self.accuracy)
    }
}

/// `values[i][c]`: reward of fitting the first class-`c` example of task `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTable {
    pub values: Vec<Vec<f64>>,
}

impl RewardTable {
    pub fn tasks(&self) -> usize {
        self.values.len()
    }

    pub fn classes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn get(&self, task: usize, class: usize) -> f64 {
        self.values[task][class]
    }
}

/// Fraction of examples whose argmax prediction equals the label.
pub fn validation_accuracy(model: &ModelParams, val: &DataView<'_>) -> Result<f64, RewardError> {
    if val.is_empty() {
        return Err(RewardError::EmptyValidationSet);
    }
    let mut correct = 0usize;
    for (x, y) in val.iter() {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / val.len() as f64)
}

/// `1 − √t·(1 − accuracy)`.
pub fn scaled_reward(t: usize, accuracy: f64) -> Result<f64, RewardError> {
    if t == 0 {
        return Err(RewardError::ZeroStep);
    }
    Ok(1.0 - (t as f64).sqrt() * (1.0 - accuracy))
}

/// For every task and class, the validation accuracy after one inner step
/// from `init` on that task's first training example of the class.
///
/// Classes outside a task's class set get the accuracy of `init` itself.
pub fn probe_reward_table(
    init: &ModelParams,
    subsets: &TaskSubsets,
    inner_step: f64,
) -> Result<RewardTable, RewardError> {
    let val = subsets.pooled_val.view();
    let base = validation_accuracy(init, &val)?;
    let classes = subsets.classes();
    let mut values = Vec::with_capacity(subsets.len());
    for task in &subsets.tasks {
        let mut row = vec![base; classes];
        for &c in &task.class_set {
            let pos = task.train.labels().iter().position(|&y| y == c).ok_or(
                RewardError::MissingClass {
                    task: task.id,
                    class: c,
                },
            )?;
            let w = inner_sgd_step(init, &task.train.slice(pos..pos + 1), inner_step)?;
            row[c] = validation_accuracy(&w, &val)?;
        }
        values.push(row);
    }
    Ok(RewardTable { values })
}

/// For every task, the validation accuracy after one inner step from `init`
/// on that task's first batch of `batch` examples.
pub fn probe_task_rewards(
    init: &ModelParams,
    subsets: &TaskSubsets,
    inner_step: f64,
    batch: usize,
) -> Result<Vec<f64>, RewardError> {
    let val = subsets.pooled_val.view();
    if val.is_empty() {
        return Err(RewardError::EmptyValidationSet);
    }
    subsets
        .tasks
        .iter()
        .map(|task| {
            let end = batch.max(1).min(task.train.len());
            let w = inner_sgd_step(init, &task.train.slice(0..end), inner_step)?;
            validation_accuracy(&w, &val)
        })
        .collect()
}
