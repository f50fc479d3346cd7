use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::data::DataView;

/// Probabilities below this are clamped inside the log of the loss.
pub const LOG_CLAMP: f64 = 1e-12;

/// Hidden layers wider than this are rejected.
pub const MAX_HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Softmax,
    Hidden { units: usize },
}

/// Classifier parameters in one flat buffer.
///
/// Layout, all row-major:
/// * softmax: `W (C×D)`, `b (C)`
/// * hidden:  `W1 (H×D)`, `b1 (H)`, `W2 (C×H)`, `b2 (C)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub arch: Architecture,
    pub input_dim: usize,
    pub classes: usize,
    pub values: Vec<f64>,
}

/// Gradient with the same layout as [`ModelParams::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Gradients) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

pub fn param_count(arch: Architecture, input_dim: usize, classes: usize) -> usize {
    match arch {
        Architecture::Softmax => classes * input_dim + classes,
        Architecture::Hidden { units } => units * input_dim + units + classes * units + classes,
    }
}

impl ModelParams {
    pub fn zeros(
        arch: Architecture,
        input_dim: usize,
        classes: usize,
    ) -> Result<Self, LearnerError> {
        Self::from_values(
            arch,
            input_dim,
            classes,
            vec![0.0; param_count(arch, input_dim, classes)],
        )
    }

    pub fn from_values(
        arch: Architecture,
        input_dim: usize,
        classes: usize,
        values: Vec<f64>,
    ) -> Result<Self, LearnerError> {
        if let Architecture::Hidden { units } = arch {
            if units == 0 || units > MAX_HIDDEN {
                return Err(LearnerError::BadArchitecture(format!(
                    "{units} hidden units (1..={MAX_HIDDEN})"
                )));
            }
        }
        if classes < 2 || input_dim == 0 {
            return Err(LearnerError::BadArchitecture(format!(
                "{classes} classes, input dim {input_dim}"
            )));
        }
        let expected = param_count(arch, input_dim, classes);
        if values.len() != expected {
            return Err(LearnerError::ShapeMismatch {
                expected,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::NonFinite);
        }
        Ok(Self {
            arch,
            input_dim,
            classes,
            values,
        })
    }

    /// Gaussian initialisation with the given standard deviation; biases start at zero.
    pub fn random<R: Rng>(
        arch: Architecture,
        input_dim: usize,
        classes: usize,
        std: f64,
        rng: &mut R,
    ) -> Result<Self, LearnerError> {
        let mut m = Self::zeros(arch, input_dim, classes)?;
        if std > 0.0 {
            let normal =
                Normal::new(0.0, std).map_err(|e| LearnerError::BadArchitecture(e.to_string()))?;
            let ranges = m.weight_ranges();
            for r in ranges {
                for v in &mut m.values[r] {
                    *v = normal.sample(rng);
                }
            }
        }
        Ok(m)
    }

    fn weight_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let (d, c) = (self.input_dim, self.classes);
        match self.arch {
            Architecture::Softmax => std::iter::once(0..c * d).collect(),
            Architecture::Hidden { units: h } => {
                let w2 = h * d + h;
                vec![0..h * d, w2..w2 + c * h]
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_input(&self, x: &[f64]) -> Result<(), LearnerError> {
        if x.len() != self.input_dim {
            return Err(LearnerError::ShapeMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, LearnerError> {
        self.check_input(x)?;
        let mut hidden = Vec::new();
        let mut logits = vec![0.0; self.classes];
        self.logits_into(x, &mut hidden, &mut logits);
        softmax_in_place(&mut logits);
        Ok(logits)
    }

    /// Predicted class, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize, LearnerError> {
        self.check_input(x)?;
        let mut hidden = Vec::new();
        let mut logits = vec![0.0; self.classes];
        self.logits_into(x, &mut hidden, &mut logits);
        // softmax is monotone, but equal logits must stay equal after it
        softmax_in_place(&mut logits);
        let mut best = 0;
        for (c, &p) in logits.iter().enumerate() {
            if p > logits[best] {
                best = c;
            }
        }
        Ok(best)
    }

    fn logits_into(&self, x: &[f64], hidden: &mut Vec<f64>, logits: &mut [f64]) {
        let (d, c) = (self.input_dim, self.classes);
        let v = &self.values;
        match self.arch {
            Architecture::Softmax => {
                let bias = c * d;
                for k in 0..c {
                    let w = &v[k * d..(k + 1) * d];
                    logits[k] = v[bias + k] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            Architecture::Hidden { units: h } => {
                let b1 = h * d;
                let w2 = b1 + h;
                let b2 = w2 + c * h;
                hidden.clear();
                for u in 0..h {
                    let w = &v[u * d..(u + 1) * d];
                    let z = v[b1 + u] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                    hidden.push(z.tanh());
                }
                for k in 0..c {
                    let w = &v[w2 + k * h..w2 + (k + 1) * h];
                    logits[k] =
                        v[b2 + k] + w.iter().zip(hidden.iter()).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
    }

    /// Mean cross-entropy over the batch and its exact gradient.
    pub fn loss_and_grad(&self, batch: &DataView<'_>) -> Result<(f64, Gradients), LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyBatch);
        }
        if batch.dim() != self.input_dim {
            return Err(LearnerError::ShapeMismatch {
                expected: self.input_dim,
                found: batch.dim(),
            });
        }
        let (d, c) = (self.input_dim, self.classes);
        let n = batch.len() as f64;
        let mut grad = vec![0.0; self.values.len()];
        let mut hidden = Vec::new();
        let mut probs = vec![0.0; c];
        let mut total = 0.0;

        for (x, y) in batch.iter() {
            if y >= c {
                return Err(LearnerError::LabelOutOfRange {
                    label: y,
                    classes: c,
                });
            }
            self.logits_into(x, &mut hidden, &mut probs);
            softmax_in_place(&mut probs);
            let py = probs[y];
            if py < LOG_CLAMP {
                // clamped region: the loss is locally constant
                total += -LOG_CLAMP.ln();
                continue;
            }
            total += -py.ln();
            let mut g_logits = probs.clone();
            g_logits[y] -= 1.0;
            for g in g_logits.iter_mut() {
                *g /= n;
            }
            match self.arch {
                Architecture::Softmax => {
                    let bias = c * d;
                    for k in 0..c {
                        let gk = g_logits[k];
                        for j in 0..d {
                            grad[k * d + j] += gk * x[j];
                        }
                        grad[bias + k] += gk;
                    }
                }
                Architecture::Hidden { units: h } => {
                    let b1 = h * d;
                    let w2 = b1 + h;
                    let b2 = w2 + c * h;
                    let mut g_hidden = vec![0.0; h];
                    for k in 0..c {
                        let gk = g_logits[k];
                        for u in 0..h {
                            grad[w2 + k * h + u] += gk * hidden[u];
                            g_hidden[u] += self.values[w2 + k * h + u] * gk;
                        }
                        grad[b2 + k] += gk;
                    }
                    for u in 0..h {
                        let gz = g_hidden[u] * (1.0 - hidden[u] * hidden[u]);
                        for j in 0..d {
                            grad[u * d + j] += gz * x[j];
                        }
                        grad[b1 + u] += gz;
                    }
                }
            }
        }
        Ok((total / n, Gradients { values: grad }))
    }

    /// Mean cross-entropy without the gradient.
    pub fn loss(&self, batch: &DataView<'_>) -> Result<f64, LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyBatch);
        }
        let mut total = 0.0;
        for (x, y) in batch.iter() {
            let p = self.forward(x)?;
            if y >= self.classes {
                return Err(LearnerError::LabelOutOfRange {
                    label: y,
                    classes: self.classes,
                });
            }
            total += -p[y].max(LOG_CLAMP).ln();
        }
        Ok(total / batch.len() as f64)
    }

    /// `self - step * grad`, as a new value.
    pub fn stepped(&self, grad: &Gradients, step: f64) -> Result<Self, LearnerError> {
        if grad.values.len() != self.values.len() {
            return Err(LearnerError::ShapeMismatch {
                expected: self.values.len(),
                found: grad.values.len(),
            });
        }
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&grad.values)
            .map(|(w, g)| w - step * g)
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::NonFinite);
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}
