use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{inner_sgd_step_with_grad, meta_update, Gradients, Hyperparams, LearnerError};
use crate::data::{DataError, TaskSubsets};
use crate::reward::{scaled_reward, validation_accuracy, RewardError};
use crate::schedulers::{Scheduler, SchedulerError, SchedulerKind};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("metrics sink: {0}")]
    Sink(#[from] std::io::Error),
}

/// Which validation examples the meta update uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    /// `B` examples from a cursor that rotates over the pooled set.
    Batch,
    /// The whole pooled validation set.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub outer_epochs: usize,
    /// Inner steps per epoch; `None` means `⌊min task size / B⌋`.
    pub inner_steps: Option<usize>,
    pub meta_step: f64,
    /// Scale the meta step by `1/√k` in epoch `k`.
    pub meta_decay: bool,
    pub validation: ValidationMode,
    pub target_accuracy: f64,
    /// End the run as soon as the target accuracy is reached.
    pub stop_at_target: bool,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 {
            return Err(TrainError::BadConfig(
                "batch size must be at least 1".into(),
            ));
        }
        if !(self.meta_step >= 0.0 && self.meta_step.is_finite()) {
            return Err(TrainError::BadConfig(format!(
                "meta step {} must be non-negative",
                self.meta_step
            )));
        }
        if !(0.0..=1.0).contains(&self.target_accuracy) {
            return Err(TrainError::BadConfig(format!(
                "target accuracy {} outside [0, 1]",
                self.target_accuracy
            )));
        }
        Ok(())
    }
}

/// One inner step of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Outer epoch, from 1.
    pub outer_k: usize,
    /// Inner step within the epoch, from 1.
    pub inner_t: usize,
    pub task: usize,
    /// Label of the first example of the consumed batch.
    pub class: usize,
    pub accuracy: f64,
    pub reward: f64,
    pub sqrt_t_error: f64,
    /// Training examples consumed so far over the whole run.
    pub samples: u64,
}

/// Outcome of one run. Wall time is kept out of serialisation so that
/// summaries of identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub samples_to_target: Option<u64>,
    pub target_accuracy: f64,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub total_samples: u64,
    pub inner_steps: u64,
    pub epochs_completed: usize,
    pub final_inner_step: f64,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

pub trait MetricsSink {
    fn record(&mut self, rec: &MetricsRecord) -> std::io::Result<()>;

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
pub struct VecSink(pub Vec<MetricsRecord>);

impl MetricsSink for VecSink {
    fn record(&mut self, rec: &MetricsRecord) -> std::io::Result<()> {
        self.0.push(rec.clone());
        Ok(())
    }
}

/// Outer loop over epochs; each epoch restarts the weights at `λ.init` and
/// every task cursor at 0, runs the scheduled inner SGD steps, and ends with
/// one meta update.
pub fn run_meta_training(
    cfg: &TrainingConfig,
    hyper: Hyperparams,
    scheduler: &mut dyn Scheduler,
    subsets: &mut TaskSubsets,
    sink: &mut dyn MetricsSink,
) -> Result<(Hyperparams, RunSummary), TrainError> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let b = cfg.batch_size;
    let steps = cfg.inner_steps.unwrap_or(subsets.min_train_len() / b);
    let mut hyper = hyper;
    let mut samples: u64 = 0;
    let mut inner_total: u64 = 0;
    let mut samples_to_target = None;
    let mut final_accuracy = validation_accuracy(&hyper.init, &subsets.pooled_val.view())?;
    let mut best_accuracy = final_accuracy;
    let mut epochs_completed = 0;
    let mut val_cursor = 0usize;

    'outer: for k in 1..=cfg.outer_epochs {
        subsets.reset_cursors();
        let mut w = hyper.init.clone();
        let mut last_grad: Option<Gradients> = None;
        let delta = hyper.inner_step();

        for t in 1..=steps {
            let upcoming = subsets.upcoming();
            let task = match scheduler.select(&upcoming) {
                Ok(task) => task,
                Err(SchedulerError::AllExhausted) => {
                    log::info!(
                        "epoch {k}: every task exhausted after {} inner steps",
                        t - 1
                    );
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            let TaskSubsets { tasks, pooled_val } = &mut *subsets;
            let batch = tasks[task].next_batch(b)?;
            let class = batch.data.labels()[0];
            let consumed = batch.data.len() as u64;
            let (next_w, grad) = inner_sgd_step_with_grad(&w, &batch.data, delta)?;
            w = next_w;
            last_grad = Some(grad);
            samples += consumed;
            inner_total += 1;

            let accuracy = validation_accuracy(&w, &pooled_val.view())?;
            let reward = scaled_reward(t, accuracy)?;
            scheduler.observe(task, reward);
            let rec = MetricsRecord {
                outer_k: k,
                inner_t: t,
                task,
                class,
                accuracy,
                reward,
                sqrt_t_error: (t as f64).sqrt() * (1.0 - accuracy),
                samples,
            };
            sink.record(&rec)?;
            final_accuracy = accuracy;
            best_accuracy = best_accuracy.max(accuracy);
            if samples_to_target.is_none() && accuracy >= cfg.target_accuracy {
                samples_to_target = Some(samples);
                if cfg.stop_at_target {
                    log::info!(
                        "target {} reached after {samples} samples",
                        cfg.target_accuracy
                    );
                    break 'outer;
                }
            }
        }

        let pooled = &subsets.pooled_val;
        let val = match cfg.validation {
            ValidationMode::Full => pooled.view(),
            ValidationMode::Batch => {
                if val_cursor + b > pooled.len() {
                    val_cursor = 0;
                }
                let end = (val_cursor + b).min(pooled.len());
                let v = pooled.slice(val_cursor..end);
                val_cursor = end;
                v
            }
        };
        let eta = if cfg.meta_decay {
            cfg.meta_step / (k as f64).sqrt()
        } else {
            cfg.meta_step
        };
        hyper = meta_update(&hyper, &w, last_grad.as_ref(), &val, eta)?;
        epochs_completed = k;
        log::debug!(
            "epoch {k}: accuracy {final_accuracy}, inner step {}",
            hyper.inner_step()
        );
    }
    sink.flush()?;

    let summary = RunSummary {
        scheduler: scheduler.kind(),
        seed: cfg.seed,
        samples_to_target,
        target_accuracy: cfg.target_accuracy,
        final_accuracy,
        best_accuracy,
        total_samples: samples,
        inner_steps: inner_total,
        epochs_completed,
        final_inner_step: hyper.inner_step(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok((hyper, summary))
}
