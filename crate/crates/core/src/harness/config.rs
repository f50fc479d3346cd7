//! Flat key/value experiment configuration in TOML syntax.
//!
//! Only `data`, `scheduler` and `seed` are required; every other key has a
//! default. Unknown keys are rejected so typos surface as errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

use crate::learner::{Architecture, ValidationMode};
use crate::schedulers::{SchedulerKind, DEFAULT_STATE_CAP, DEFAULT_U, DEFAULT_XI};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required key {0:?}")]
    MissingKey(String),
    #[error("bad value for {key:?}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ConfigError {
    fn bad(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::BadValue {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub tasks: usize,
    pub classes: usize,
    pub dim: usize,
    /// Diagonal of each task's transition matrix; one entry applies to all.
    pub diagonal: Vec<f64>,
    /// Feature noise of each task; one entry applies to all.
    pub noise: Vec<f64>,
    /// Norm of every class mean.
    pub separation: f64,
    pub train: usize,
    pub val: usize,
    /// Data seed; the run seed when absent.
    pub seed: Option<u64>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            tasks: 3,
            classes: 4,
            dim: 4,
            diagonal: vec![0.8],
            noise: vec![1.0],
            separation: 3.0,
            train: 600,
            val: 100,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    Csv {
        path: PathBuf,
        label: String,
        /// Empty means every non-label, non-task column.
        features: Vec<String>,
        task_column: Option<String>,
        tasks: usize,
        val_fraction: f64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Keep only the first `limit` examples.
        limit: Option<usize>,
        tasks: usize,
        val_fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdpSolver {
    Lp,
    ValueIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub batch_size: usize,
    pub outer_epochs: usize,
    pub inner_steps: Option<usize>,
    pub meta_step: f64,
    pub meta_decay: bool,
    pub inner_step: f64,
    pub validation: ValidationMode,
    pub architecture: Architecture,
    pub init_std: f64,
    pub beta: f64,
    pub gamma: f64,
    pub ucb_u: f64,
    pub xi: f64,
    pub mdp_state_cap: usize,
    pub mdp_solver: MdpSolver,
    pub target_accuracy: f64,
    pub stop_at_target: bool,
    pub out: Option<PathBuf>,
    pub compare_schedulers: Vec<SchedulerKind>,
    pub compare_seeds: usize,
}

const KEYS: &[&str] = &[
    "data",
    "scheduler",
    "seed",
    "batch_size",
    "outer_epochs",
    "inner_steps",
    "meta_step",
    "meta_decay",
    "inner_step",
    "validation",
    "architecture",
    "hidden_units",
    "init_std",
    "beta",
    "gamma",
    "ucb_u",
    "xi",
    "mdp_state_cap",
    "mdp_solver",
    "target_accuracy",
    "stop_at_target",
    "out",
    "compare_schedulers",
    "compare_seeds",
    "tasks",
    "val_fraction",
    "csv_path",
    "csv_label",
    "csv_features",
    "csv_task_column",
    "idx_images",
    "idx_labels",
    "idx_limit",
    "synthetic_tasks",
    "synthetic_classes",
    "synthetic_dim",
    "synthetic_diagonal",
    "synthetic_noise",
    "synthetic_separation",
    "synthetic_train",
    "synthetic_val",
    "synthetic_seed",
];

struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn required(&self, key: &str) -> Result<&Value, ConfigError> {
        self.get(key)
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn string(&self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(ConfigError::bad(key, "expected a string")),
        }
    }

    fn required_string(&self, key: &str) -> Result<String, ConfigError> {
        self.string(key)?
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(ConfigError::bad(key, "expected a non-negative integer")),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.uint(key)?.map_or(default, |v| v as usize))
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) if f.is_finite() => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(ConfigError::bad(key, "expected a finite number")),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(ConfigError::bad(key, "expected true or false")),
        }
    }

    /// A number or an array of numbers.
    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) if f.is_finite() => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(ConfigError::bad(key, "expected numbers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => self.float(key).map(|v| v.map(|f| vec![f])),
        }
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ConfigError::bad(key, "expected strings"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(Value::String(s)) => Ok(Some(vec![s.clone()])),
            Some(_) => Err(ConfigError::bad(key, "expected a string array")),
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    /// Makes relative data paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.data {
            DataSource::Synthetic(_) => {}
            DataSource::Csv { path, .. } => fix(path),
            DataSource::Idx { images, labels, .. } => {
                fix(images);
                fix(labels);
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let known: BTreeSet<&str> = KEYS.iter().copied().collect();
        if let Some(k) = table.keys().find(|k| !known.contains(k.as_str())) {
            return Err(ConfigError::bad(k, "unknown key"));
        }
        let r = Reader { table: &table };

        let seed = match r.required("seed")? {
            Value::Integer(i) if *i >= 0 => *i as u64,
            _ => return Err(ConfigError::bad("seed", "expected a non-negative integer")),
        };
        let scheduler: SchedulerKind = r.required_string("scheduler")?.parse().map_err(|_| {
            ConfigError::bad("scheduler", "expected cyclic, random, ucb, gittins or mdp")
        })?;

        let tasks = r.usize_or("tasks", 3)?;
        let val_fraction = r.float_or("val_fraction", 0.2)?;
        let data = match r.required_string("data")?.as_str() {
            "synthetic" => {
                let d = SyntheticConfig::default();
                DataSource::Synthetic(SyntheticConfig {
                    tasks: r.usize_or("synthetic_tasks", d.tasks)?,
                    classes: r.usize_or("synthetic_classes", d.classes)?,
                    dim: r.usize_or("synthetic_dim", d.dim)?,
                    diagonal: r.floats("synthetic_diagonal")?.unwrap_or(d.diagonal),
                    noise: r.floats("synthetic_noise")?.unwrap_or(d.noise),
                    separation: r.float_or("synthetic_separation", d.separation)?,
                    train: r.usize_or("synthetic_train", d.train)?,
                    val: r.usize_or("synthetic_val", d.val)?,
                    seed: r.uint("synthetic_seed")?,
                })
            }
            "csv" => DataSource::Csv {
                path: PathBuf::from(r.required_string("csv_path")?),
                label: r.required_string("csv_label")?,
                features: r.strings("csv_features")?.unwrap_or_default(),
                task_column: r.string("csv_task_column")?,
                tasks,
                val_fraction,
            },
            "idx" => DataSource::Idx {
                images: PathBuf::from(r.required_string("idx_images")?),
                labels: PathBuf::from(r.required_string("idx_labels")?),
                limit: r.uint("idx_limit")?.map(|v| v as usize),
                tasks,
                val_fraction,
            },
            other => {
                return Err(ConfigError::bad(
                    "data",
                    format!("unknown source {other:?}; expected synthetic, csv or idx"),
                ))
            }
        };

        let architecture = match r.string("architecture")?.as_deref().unwrap_or("softmax") {
            "softmax" => Architecture::Softmax,
            "hidden" => Architecture::Hidden {
                units: r.usize_or("hidden_units", 16)?,
            },
            other => {
                return Err(ConfigError::bad(
                    "architecture",
                    format!("unknown architecture {other:?}"),
                ))
            }
        };
        let validation = match r.string("validation")?.as_deref().unwrap_or("batch") {
            "batch" => ValidationMode::Batch,
            "full" => ValidationMode::Full,
            _ => return Err(ConfigError::bad("validation", "expected batch or full")),
        };
        let mdp_solver = match r.string("mdp_solver")?.as_deref().unwrap_or("lp") {
            "lp" => MdpSolver::Lp,
            "value_iteration" => MdpSolver::ValueIteration,
            _ => {
                return Err(ConfigError::bad(
                    "mdp_solver",
                    "expected lp or value_iteration",
                ))
            }
        };
        let compare_schedulers = match r.strings("compare_schedulers")? {
            None => SchedulerKind::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| {
                    n.parse().map_err(|_| {
                        ConfigError::bad("compare_schedulers", format!("unknown scheduler {n:?}"))
                    })
                })
                .collect::<Result<_, _>>()?,
        };

        let cfg = ExperimentConfig {
            data,
            scheduler,
            seed,
            batch_size: r.usize_or("batch_size", 4)?,
            outer_epochs: r.usize_or("outer_epochs", 3)?,
            inner_steps: r.uint("inner_steps")?.map(|v| v as usize),
            meta_step: r.float_or("meta_step", 0.05)?,
            meta_decay: r.bool_or("meta_decay", false)?,
            inner_step: r.float_or("inner_step", 0.1)?,
            validation,
            architecture,
            init_std: r.float_or("init_std", 0.01)?,
            beta: r.float_or("beta", 0.9)?,
            gamma: r.float_or("gamma", 0.9)?,
            ucb_u: r.float_or("ucb_u", DEFAULT_U)?,
            xi: r.float_or("xi", DEFAULT_XI)?,
            mdp_state_cap: r.usize_or("mdp_state_cap", DEFAULT_STATE_CAP)?,
            mdp_solver,
            target_accuracy: r.float_or("target_accuracy", 0.8)?,
            stop_at_target: r.bool_or("stop_at_target", false)?,
            out: r.string("out")?.map(PathBuf::from),
            compare_schedulers,
            compare_seeds: r.usize_or("compare_seeds", 5)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.batch_size == 0 {
            return Err(ConfigError::bad("batch_size", "must be at least 1"));
        }
        if !(self.xi > 1.0) {
            return Err(ConfigError::bad("xi", "must exceed 1"));
        }
        for (key, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ConfigError::bad(key, "must lie strictly between 0 and 1"));
            }
        }
        if !(self.inner_step > 0.0) {
            return Err(ConfigError::bad("inner_step", "must be positive"));
        }
        if !(self.meta_step >= 0.0) {
            return Err(ConfigError::bad("meta_step", "must be non-negative"));
        }
        if !(self.init_std >= 0.0) {
            return Err(ConfigError::bad("init_std", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.target_accuracy) {
            return Err(ConfigError::bad("target_accuracy", "must lie in [0, 1]"));
        }
        if self.ucb_u <= 0.0 {
            return Err(ConfigError::bad("ucb_u", "must be positive"));
        }
        if self.mdp_state_cap == 0 {
            return Err(ConfigError::bad("mdp_state_cap", "must be positive"));
        }
        if let Architecture::Hidden { units } = self.architecture {
            if units == 0 || units > crate::learner::MAX_HIDDEN {
                return Err(ConfigError::bad(
                    "hidden_units",
                    format!("must lie in 1..={}", crate::learner::MAX_HIDDEN),
                ));
            }
        }
        if self.compare_seeds == 0 {
            return Err(ConfigError::bad("compare_seeds", "must be at least 1"));
        }
        match &self.data {
            DataSource::Synthetic(s) => {
                if s.tasks == 0 {
                    return Err(ConfigError::bad("synthetic_tasks", "must be at least 1"));
                }
                if s.classes < 2 {
                    return Err(ConfigError::bad("synthetic_classes", "must be at least 2"));
                }
                if s.dim == 0 {
                    return Err(ConfigError::bad("synthetic_dim", "must be at least 1"));
                }
                if s.train == 0 || s.val == 0 {
                    return Err(ConfigError::bad(
                        "synthetic_train",
                        "train and validation sizes must be positive",
                    ));
                }
                for (key, list) in [
                    ("synthetic_diagonal", &s.diagonal),
                    ("synthetic_noise", &s.noise),
                ] {
                    if list.len() != 1 && list.len() != s.tasks {
                        return Err(ConfigError::bad(
                            key,
                            format!("needs 1 or {} entries", s.tasks),
                        ));
                    }
                }
                if s.diagonal.iter().any(|d| !(0.0..=1.0).contains(d)) {
                    return Err(ConfigError::bad(
                        "synthetic_diagonal",
                        "entries must lie in [0, 1]",
                    ));
                }
                if s.noise.iter().any(|v| !(*v > 0.0)) {
                    return Err(ConfigError::bad(
                        "synthetic_noise",
                        "entries must be positive",
                    ));
                }
            }
            DataSource::Csv {
                tasks,
                val_fraction,
                ..
            }
            | DataSource::Idx {
                tasks,
                val_fraction,
                ..
            } => {
                if *tasks == 0 {
                    return Err(ConfigError::bad("tasks", "must be at least 1"));
                }
                if !(*val_fraction > 0.0 && *val_fraction < 1.0) {
                    return Err(ConfigError::bad(
                        "val_fraction",
                        "must lie strictly between 0 and 1",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Flat TOML text that parses back to an equal config.
    pub fn to_toml(&self) -> String {
        let mut t = Table::new();
        let int = |v: usize| Value::Integer(v as i64);
        let floats = |v: &[f64]| Value::Array(v.iter().map(|&f| Value::Float(f)).collect());
        match &self.data {
            DataSource::Synthetic(s) => {
                t.insert("data".into(), "synthetic".into());
                t.insert("synthetic_tasks".into(), int(s.tasks));
                t.insert("synthetic_classes".into(), int(s.classes));
                t.insert("synthetic_dim".into(), int(s.dim));
                t.insert("synthetic_diagonal".into(), floats(&s.diagonal));
                t.insert("synthetic_noise".into(), floats(&s.noise));
                t.insert("synthetic_separation".into(), Value::Float(s.separation));
                t.insert("synthetic_train".into(), int(s.train));
                t.insert("synthetic_val".into(), int(s.val));
                if let Some(seed) = s.seed {
                    t.insert("synthetic_seed".into(), Value::Integer(seed as i64));
                }
            }
            DataSource::Csv {
                path,
                label,
                features,
                task_column,
                tasks,
                val_fraction,
            } => {
                t.insert("data".into(), "csv".into());
                t.insert("csv_path".into(), path.display().to_string().into());
                t.insert("csv_label".into(), label.clone().into());
                if !features.is_empty() {
                    t.insert(
                        "csv_features".into(),
                        Value::Array(features.iter().map(|f| Value::String(f.clone())).collect()),
                    );
                }
                if let Some(c) = task_column {
                    t.insert("csv_task_column".into(), c.clone().into());
                }
                t.insert("tasks".into(), int(*tasks));
                t.insert("val_fraction".into(), Value::Float(*val_fraction));
            }
            DataSource::Idx {
                images,
                labels,
                limit,
                tasks,
                val_fraction,
            } => {
                t.insert("data".into(), "idx".into());
                t.insert("idx_images".into(), images.display().to_string().into());
                t.insert("idx_labels".into(), labels.display().to_string().into());
                if let Some(l) = limit {
                    t.insert("idx_limit".into(), int(*l));
                }
                t.insert("tasks".into(), int(*tasks));
                t.insert("val_fraction".into(), Value::Float(*val_fraction));
            }
        }
        t.insert("scheduler".into(), self.scheduler.as_str().into());
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert("batch_size".into(), int(self.batch_size));
        t.insert("outer_epochs".into(), int(self.outer_epochs));
        if let Some(s) = self.inner_steps {
            t.insert("inner_steps".into(), int(s));
        }
        t.insert("meta_step".into(), Value::Float(self.meta_step));
        t.insert("meta_decay".into(), Value::Boolean(self.meta_decay));
        t.insert("inner_step".into(), Value::Float(self.inner_step));
        let validation = match self.validation {
            ValidationMode::Batch => "batch",
            ValidationMode::Full => "full",
        };
        t.insert("validation".into(), validation.into());
        match self.architecture {
            Architecture::Softmax => {
                t.insert("architecture".into(), "softmax".into());
            }
            Architecture::Hidden { units } => {
                t.insert("architecture".into(), "hidden".into());
                t.insert("hidden_units".into(), int(units));
            }
        }
        t.insert("init_std".into(), Value::Float(self.init_std));
        t.insert("beta".into(), Value::Float(self.beta));
        t.insert("gamma".into(), Value::Float(self.gamma));
        t.insert("ucb_u".into(), Value::Float(self.ucb_u));
        t.insert("xi".into(), Value::Float(self.xi));
        t.insert("mdp_state_cap".into(), int(self.mdp_state_cap));
        let solver = match self.mdp_solver {
            MdpSolver::Lp => "lp",
            MdpSolver::ValueIteration => "value_iteration",
        };
        t.insert("mdp_solver".into(), solver.into());
        t.insert("target_accuracy".into(), Value::Float(self.target_accuracy));
        t.insert("stop_at_target".into(), Value::Boolean(self.stop_at_target));
        if let Some(out) = &self.out {
            t.insert("out".into(), out.display().to_string().into());
        }
        t.insert(
            "compare_schedulers".into(),
            Value::Array(
                self.compare_schedulers
                    .iter()
                    .map(|k| Value::String(k.as_str().into()))
                    .collect(),
            ),
        );
        t.insert("compare_seeds".into(), int(self.compare_seeds));
        t.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "data = \"synthetic\"\nscheduler = \"gittins\"\nseed = 7\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.scheduler, SchedulerKind::Gittins);
        assert_eq!(c.seed, 7);
        assert_eq!((c.ucb_u, c.xi, c.beta, c.gamma), (2.0, 2.0, 0.9, 0.9));
        assert_eq!(c.data, DataSource::Synthetic(SyntheticConfig::default()));
        assert_eq!(c.mdp_state_cap, 4096);
    }

    #[test]
    fn missing_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::parse("data = \"synthetic\"\nscheduler = \"ucb\"\n"),
            Err(ConfigError::MissingKey(k)) if k == "seed"
        ));
        match ExperimentConfig::parse(&format!("{MINIMAL}xi = 0.5\n")) {
            Err(ConfigError::BadValue { key, reason }) => {
                assert_eq!((key.as_str(), reason.as_str()), ("xi", "must exceed 1"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ExperimentConfig::parse(&format!("{MINIMAL}beta = 1.0\n")),
            Err(ConfigError::BadValue { key, .. }) if key == "beta"
        ));
        assert!(matches!(
            ExperimentConfig::parse(&format!("{MINIMAL}bogus = 1\n")),
            Err(ConfigError::BadValue { key, .. }) if key == "bogus"
        ));
        assert!(matches!(
            ExperimentConfig::parse("seed = = 1"),
            Err(ConfigError::Syntax(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("data = \"csv\"\nscheduler = \"ucb\"\nseed = 1\n"),
            Err(ConfigError::MissingKey(k)) if k == "csv_path"
        ));
    }

    #[test]
    fn serialise_round_trip() {
        let texts = [
            MINIMAL.to_string(),
            format!("{MINIMAL}architecture = \"hidden\"\nhidden_units = 8\nsynthetic_noise = [0.5, 1, 2.5]\ninner_steps = 40\nout = \"runs/a\"\nsynthetic_seed = 3\n"),
            "data = \"csv\"\nscheduler = \"mdp\"\nseed = 2\ncsv_path = \"d.csv\"\ncsv_label = \"y\"\ncsv_features = [\"a\", \"b\"]\ncsv_task_column = \"task\"\nmdp_solver = \"value_iteration\"\n".to_string(),
            "data = \"idx\"\nscheduler = \"random\"\nseed = 3\nidx_images = \"i\"\nidx_labels = \"l\"\nidx_limit = 100\ncompare_schedulers = [\"cyclic\", \"ucb\"]\n".to_string(),
        ];
        for text in texts {
            let a = ExperimentConfig::parse(&text).unwrap();
            let b = ExperimentConfig::parse(&a.to_toml()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_toml(), b.to_toml());
        }
    }
}
