//! Experiment orchestration: configuration, data and scheduler setup, the
//! metrics and summary files of a run, scheduler comparisons across seeds,
//! and the reward stationarity report.

mod artifacts;
mod compare;
mod config;
mod run;
mod setup;
mod stationarity;

pub use artifacts::{precompute, probe, write_precomputed, MdpArtifact, Precomputed};
pub use compare::{
    compare_schedulers, write_comparison, ComparisonRow, ComparisonTable, RowStatus,
};
pub use config::{ConfigError, DataSource, ExperimentConfig, MdpSolver, SyntheticConfig};
pub use run::{read_metrics_csv, run_experiment, write_metrics_csv, RunOutput, METRICS_HEADER};
pub use setup::{
    build_scheduler, build_subsets, estimate_task_transitions, initial_hyperparams, synthetic_spec,
};
pub use stationarity::{
    stationarity_report, write_stationarity, SeriesStats, StationarityReport, CV_LIMIT, MIN_STEPS,
    TREND_LIMIT,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::DataError;
use crate::learner::{LearnerError, TrainError};
use crate::markov::MarkovError;
use crate::reward::RewardError;
use crate::schedulers::SchedulerError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("comparison needs the cyclic baseline among its schedulers")]
    BaselineMissing,
    #[error("metrics hold {steps} inner steps; at least {needed} are needed")]
    TooFewSteps { steps: usize, needed: usize },
    #[error("metrics file line {line}: {reason}")]
    MetricsFormat { line: usize, reason: String },
}

impl HarnessError {
    /// Process exit code: 2 for configuration, 3 for input data, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_)
            | HarnessError::Markov(_)
            | HarnessError::TooFewSteps { .. }
            | HarnessError::MetricsFormat { .. }
            | HarnessError::Reward(
                RewardError::MissingClass { .. } | RewardError::EmptyValidationSet,
            ) => 3,
            _ => 4,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes pretty JSON followed by a newline.
pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}
