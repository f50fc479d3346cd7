//! A small classifier with hand-derived gradients, the task-level SGD step,
//! and the first-order meta update over the hyperparameters
//! `λ = (initial parameters, log inner step size)`.

mod model;
mod train;

pub use model::{param_count, Architecture, Gradients, ModelParams, LOG_CLAMP, MAX_HIDDEN};
pub use train::{
    run_meta_training, MetricsRecord, MetricsSink, RunSummary, TrainError, TrainingConfig,
    ValidationMode, VecSink,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataView;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite parameter")]
    NonFinite,
    #[error("bad architecture: {0}")]
    BadArchitecture(String),
    #[error("step size must be non-negative, got {0}")]
    BadStep(f64),
}

/// Meta-learned hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub init: ModelParams,
    pub log_inner_step: f64,
}

impl Hyperparams {
    pub fn new(init: ModelParams, inner_step: f64) -> Result<Self, LearnerError> {
        if !(inner_step > 0.0 && inner_step.is_finite()) {
            return Err(LearnerError::BadStep(inner_step));
        }
        Ok(Self {
            init,
            log_inner_step: inner_step.ln(),
        })
    }

    /// The inner step size `δ = exp(log_inner_step)`.
    pub fn inner_step(&self) -> f64 {
        self.log_inner_step.exp()
    }
}

/// Gradient of the validation loss with respect to `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaGradient {
    pub init: Gradients,
    pub log_inner_step: f64,
    pub val_loss: f64,
}

/// `w − δ·∇(mean batch loss)`, returned together with the gradient used.
pub fn inner_sgd_step_with_grad(
    w: &ModelParams,
    batch: &DataView<'_>,
    step: f64,
) -> Result<(ModelParams, Gradients), LearnerError> {
    if !(step >= 0.0) {
        return Err(LearnerError::BadStep(step));
    }
    let (_, grad) = w.loss_and_grad(batch)?;
    Ok((w.stepped(&grad, step)?, grad))
}

pub fn inner_sgd_step(
    w: &ModelParams,
    batch: &DataView<'_>,
    step: f64,
) -> Result<ModelParams, LearnerError> {
    inner_sgd_step_with_grad(w, batch, step).map(|(w, _)| w)
}

/// First-order meta-gradient.
///
/// The Jacobian of the adapted weights with respect to the initial weights
/// is taken as the identity, so the init component is the validation
/// gradient at `final_w`. The log-step component differentiates only the
/// last inner step `w_N = w_{N-1} − δ g_{N-1}`, giving
/// `∇L(w_N) · (−δ g_{N-1})`; it is zero when no inner step ran.
pub fn meta_gradient(
    hyper: &Hyperparams,
    final_w: &ModelParams,
    last_inner_grad: Option<&Gradients>,
    val_batch: &DataView<'_>,
) -> Result<MetaGradient, LearnerError> {
    if final_w.len() != hyper.init.len() {
        return Err(LearnerError::ShapeMismatch {
            expected: hyper.init.len(),
            found: final_w.len(),
        });
    }
    let (val_loss, g_val) = final_w.loss_and_grad(val_batch)?;
    let log_inner_step = match last_inner_grad {
        Some(g) => -hyper.inner_step() * g_val.dot(g),
        None => 0.0,
    };
    Ok(MetaGradient {
        init: g_val,
        log_inner_step,
        val_loss,
    })
}

/// `λ' = λ − η·∇_λ L`.
pub fn meta_update(
    hyper: &Hyperparams,
    final_w: &ModelParams,
    last_inner_grad: Option<&Gradients>,
    val_batch: &DataView<'_>,
    eta: f64,
) -> Result<Hyperparams, LearnerError> {
    if !(eta >= 0.0) {
        return Err(LearnerError::BadStep(eta));
    }
    let g = meta_gradient(hyper, final_w, last_inner_grad, val_batch)?;
    let init = hyper.init.stepped(&g.init, eta)?;
    let log_inner_step = hyper.log_inner_step - eta * g.log_inner_step;
    if !log_inner_step.is_finite() {
        return Err(LearnerError::NonFinite);
    }
    Ok(Hyperparams {
        init,
        log_inner_step,
    })
}
