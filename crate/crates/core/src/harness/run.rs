use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::artifacts::{write_precomputed, Precomputed};
use super::config::ExperimentConfig;
use super::setup::{build_scheduler, build_subsets, initial_hyperparams};
use super::{ensure_dir, io_err, write_json, HarnessError};
use crate::learner::{
    run_meta_training, Hyperparams, MetricsRecord, MetricsSink, RunSummary, TrainingConfig,
};

/// Column order of the metrics file. Floats use the shortest decimal text
/// that reads back to the same value.
pub const METRICS_HEADER: &str = "outer_k,inner_t,task,class,accuracy,reward,sqrt_t_error,samples";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub hyperparams: Hyperparams,
    pub metrics: Vec<MetricsRecord>,
    pub precomputed: Precomputed,
}

fn metrics_line(r: &MetricsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.outer_k, r.inner_t, r.task, r.class, r.accuracy, r.reward, r.sqrt_t_error, r.samples
    )
}

/// Collects records and, when a file is attached, streams them to it.
struct CollectingSink {
    records: Vec<MetricsRecord>,
    file: Option<BufWriter<File>>,
}

impl MetricsSink for CollectingSink {
    fn record(&mut self, rec: &MetricsRecord) -> std::io::Result<()> {
        if let Some(f) = self.file.as_mut() {
            writeln!(f, "{}", metrics_line(rec))?;
        }
        self.records.push(rec.clone());
        Ok(())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self.file.as_mut() {
            Some(f) => f.flush(),
            None => Ok(()),
        }
    }
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    let mut text = String::from(METRICS_HEADER);
    text.push('\n');
    for r in records {
        text.push_str(&metrics_line(r));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRecord>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| HarnessError::MetricsFormat {
            line: 0,
            reason: e.to_string(),
        })?;
    let header = reader.headers().map_err(|e| HarnessError::MetricsFormat {
        line: 1,
        reason: e.to_string(),
    })?;
    let header: Vec<&str> = header.iter().collect();
    if header.join(",") != METRICS_HEADER {
        return Err(HarnessError::MetricsFormat {
            line: 1,
            reason: format!("expected header {METRICS_HEADER:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| HarnessError::MetricsFormat {
            line,
            reason: e.to_string(),
        })?;
        let bad = |what: &str| HarnessError::MetricsFormat {
            line,
            reason: format!("bad {what}"),
        };
        let uint = |k: usize, what: &str| {
            row.get(k)
                .and_then(|s| s.trim().parse::<u64>().ok())
                .ok_or_else(|| bad(what))
        };
        let float = |k: usize, what: &str| {
            row.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(what))
        };
        out.push(MetricsRecord {
            outer_k: uint(0, "outer_k")? as usize,
            inner_t: uint(1, "inner_t")? as usize,
            task: uint(2, "task")? as usize,
            class: uint(3, "class")? as usize,
            accuracy: float(4, "accuracy")?,
            reward: float(5, "reward")?,
            sqrt_t_error: float(6, "sqrt_t_error")?,
            samples: uint(7, "samples")?,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct Timing {
    wall_time_secs: f64,
}

fn training_config(cfg: &ExperimentConfig) -> TrainingConfig {
    TrainingConfig {
        batch_size: cfg.batch_size,
        outer_epochs: cfg.outer_epochs,
        inner_steps: cfg.inner_steps,
        meta_step: cfg.meta_step,
        meta_decay: cfg.meta_decay,
        validation: cfg.validation,
        target_accuracy: cfg.target_accuracy,
        stop_at_target: cfg.stop_at_target,
        seed: cfg.seed,
    }
}

/// One end-to-end run. With an output directory it writes `metrics.csv`,
/// `summary.json`, `hyperparams.json`, `config.toml`, the precomputed
/// scheduler artifacts, and `timing.json`; every file except the last is a
/// pure function of the config.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let mut subsets = build_subsets(cfg)?;
    let hyper = initial_hyperparams(cfg, &subsets)?;
    let (mut scheduler, precomputed) = build_scheduler(cfg, &subsets, &hyper)?;

    let metrics_path: Option<PathBuf> = out.map(|d| d.join("metrics.csv"));
    let file = match (&metrics_path, out) {
        (Some(path), Some(dir)) => {
            ensure_dir(dir)?;
            let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
            writeln!(f, "{METRICS_HEADER}").map_err(io_err(path))?;
            Some(f)
        }
        _ => None,
    };
    let mut sink = CollectingSink {
        records: Vec::new(),
        file,
    };
    let result = run_meta_training(
        &training_config(cfg),
        hyper,
        scheduler.as_mut(),
        &mut subsets,
        &mut sink,
    );
    let (hyperparams, summary) = match result {
        Ok(v) => v,
        Err(e) => {
            if let Err(flush) = sink.flush() {
                log::error!("flushing partial metrics failed: {flush}");
            }
            return Err(e.into());
        }
    };
    log::info!(
        "{} seed {}: samples to target {:?}, final accuracy {}",
        summary.scheduler,
        summary.seed,
        summary.samples_to_target,
        summary.final_accuracy
    );

    if let Some(dir) = out {
        write_json(&dir.join("summary.json"), &summary)?;
        write_json(&dir.join("hyperparams.json"), &hyperparams)?;
        let config_path = dir.join("config.toml");
        std::fs::write(&config_path, cfg.to_toml()).map_err(io_err(&config_path))?;
        write_precomputed(dir, &precomputed)?;
        write_json(
            &dir.join("timing.json"),
            &Timing {
                wall_time_secs: summary.wall_time_secs,
            },
        )?;
    }
    Ok(RunOutput {
        summary,
        hyperparams,
        metrics: sink.records,
        precomputed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheduler: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "data = \"synthetic\"\nscheduler = \"{scheduler}\"\nseed = 5\nsynthetic_train = 120\nsynthetic_val = 30\nouter_epochs = 2\n"
        ))
        .unwrap()
    }

    #[test]
    fn writes_deterministic_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = small("gittins");
        run_experiment(&cfg, Some(a.path())).unwrap();
        run_experiment(&cfg, Some(b.path())).unwrap();
        for f in [
            "metrics.csv",
            "summary.json",
            "hyperparams.json",
            "config.toml",
            "gittins.json",
        ] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            let y = std::fs::read(b.path().join(f)).unwrap();
            assert_eq!(x, y, "{f} differs");
        }
        assert!(a.path().join("timing.json").exists());
    }

    #[test]
    fn metrics_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&small("ucb"), Some(dir.path())).unwrap();
        let back = read_metrics_csv(&dir.path().join("metrics.csv")).unwrap();
        assert_eq!(back, out.metrics);
        assert_eq!(out.metrics.len(), 2 * 30);
    }

    #[test]
    fn zero_epochs() {
        let mut cfg = small("cyclic");
        cfg.outer_epochs = 0;
        let out = run_experiment(&cfg, None).unwrap();
        assert!(out.metrics.is_empty());
        assert_eq!(out.summary.samples_to_target, None);
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(
            read_metrics_csv(&p),
            Err(HarnessError::MetricsFormat { line: 1, .. })
        ));
        std::fs::write(&p, format!("{METRICS_HEADER}\n1,1,0,0,x,0,0,4\n")).unwrap();
        assert!(matches!(
            read_metrics_csv(&p),
            Err(HarnessError::MetricsFormat { line: 2, .. })
        ));
    }
}
