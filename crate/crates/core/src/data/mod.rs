//! Datasets, task subsets with order-preserving train/validation splits,
//! per-task batch cursors, and the synthetic meta-dataset generator.
//!
//! Nothing in this module reorders examples: the order of a task's training
//! slice carries the label dynamics the schedulers exploit.

mod csv_io;
mod idx;
mod subset;
mod synthetic;

pub use csv_io::{load_csv, write_csv, CsvData, CsvSchema};
pub use idx::{encode_idx, load_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use subset::{block_assignment, split_tasks, Batch, TaskSubset, TaskSubsets};
pub use synthetic::{make_synthetic, ClassGaussian, SyntheticData, SyntheticSpec, SyntheticTask};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::MarkovError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("bad magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic { found: u32, expected: u32 },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{what} truncated: need {needed} bytes, have {have}")]
    Truncated {
        what: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("task {0} has no examples")]
    EmptyTask(usize),
    #[error("pooled validation set is empty")]
    EmptyValidation,
    #[error("assignment has {found} entries for {expected} examples")]
    AssignmentLength { expected: usize, found: usize },
    #[error("validation fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("task {task} is exhausted")]
    Exhausted { task: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("invalid synthetic spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Feature table with dense class ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    classes: usize,
    /// Original label text for each dense id.
    pub label_names: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        classes: usize,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        if dim == 0 || features.len() != dim * labels.len() {
            return Err(DataError::Invalid(format!(
                "{} feature values for {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(DataError::Invalid(format!(
                "label {l} with {classes} classes"
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invalid(format!(
                "non-finite feature in row {}",
                i / dim
            )));
        }
        let label_names = (0..classes).map(|c| c.to_string()).collect();
        Ok(Self {
            features,
            dim,
            labels,
            classes,
            label_names,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn view(&self) -> DataView<'_> {
        DataView {
            features: &self.features,
            labels: &self.labels,
            dim: self.dim,
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> DataView<'_> {
        self.view().slice(range)
    }

    /// Copies the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.x(r));
            labels.push(self.labels[r]);
        }
        Dataset {
            features,
            dim: self.dim,
            labels,
            classes: self.classes,
            label_names: self.label_names.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Borrowed contiguous rows of a dataset.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    features: &'a [f64],
    labels: &'a [usize],
    dim: usize,
}

impl<'a> DataView<'a> {
    pub fn new(features: &'a [f64], labels: &'a [usize], dim: usize) -> Self {
        assert_eq!(
            features.len(),
            labels.len() * dim,
            "feature/label length mismatch"
        );
        Self {
            features,
            labels,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &'a [usize] {
        self.labels
    }

    pub fn x(&self, i: usize) -> &'a [f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> DataView<'a> {
        DataView {
            features: &self.features[range.start * self.dim..range.end * self.dim],
            labels: &self.labels[range],
            dim: self.dim,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [f64], usize)> + '_ {
        let features = self.features;
        let dim = self.dim;
        self.labels
            .iter()
            .enumerate()
            .map(move |(i, &y)| (&features[i * dim..(i + 1) * dim], y))
    }
}
