use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::ExperimentConfig;
use super::run::run_experiment;
use super::{ensure_dir, io_err, HarnessError};
use crate::schedulers::{SchedulerError, SchedulerKind};

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ran,
    /// The scheduler could not be built for this data, e.g. an oversized MDP.
    NotRun(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scheduler: SchedulerKind,
    pub status: RowStatus,
    /// Samples to target per seed, `None` when the target was never reached.
    pub per_seed: Vec<Option<u64>>,
    pub final_accuracy: Vec<f64>,
    /// Median samples to target with unreached runs counted as infinite;
    /// `None` when the median is infinite.
    pub median: Option<f64>,
    /// Baseline median over this median: infinite when only the baseline
    /// never reaches the target, zero when this scheduler never does.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub seeds: Vec<u64>,
    pub target_accuracy: f64,
    /// Rows in canonical scheduler order, independent of the requested order.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, kind: SchedulerKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.scheduler == kind)
    }
}

fn median(values: &[Option<u64>]) -> Option<f64> {
    let mut v: Vec<f64> = values
        .iter()
        .map(|x| x.map_or(f64::INFINITY, |s| s as f64))
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    m.is_finite().then_some(m)
}

fn ratio(baseline: Option<f64>, this: Option<f64>) -> f64 {
    match (baseline, this) {
        (_, None) => 0.0,
        (None, Some(_)) => f64::INFINITY,
        (Some(b), Some(s)) => b / s,
    }
}

type Outcome = Result<(Option<u64>, f64), HarnessError>;

/// Runs every scheduler on every seed and reports median samples to target
/// relative to cyclic sampling. Runs execute on all available cores.
pub fn compare_schedulers(
    cfg: &ExperimentConfig,
    schedulers: &[SchedulerKind],
    seeds: &[u64],
) -> Result<ComparisonTable, HarnessError> {
    let mut kinds = schedulers.to_vec();
    kinds.sort();
    kinds.dedup();
    if !kinds.contains(&SchedulerKind::Cyclic) {
        return Err(HarnessError::BaselineMissing);
    }
    let jobs: Vec<(usize, usize)> = (0..kinds.len())
        .flat_map(|k| (0..seeds.len()).map(move |s| (k, s)))
        .collect();
    let results: Vec<Mutex<Option<Outcome>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(k, s)) = jobs.get(j) else { break };
                let mut run_cfg = cfg.clone();
                run_cfg.scheduler = kinds[k];
                run_cfg.seed = seeds[s];
                run_cfg.out = None;
                let outcome = run_experiment(&run_cfg, None)
                    .map(|o| (o.summary.samples_to_target, o.summary.final_accuracy));
                *results[j].lock().expect("result slot") = Some(outcome);
            });
        }
    });

    let mut outcomes = results
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("job ran"));
    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in &kinds {
        let mut per_seed = Vec::with_capacity(seeds.len());
        let mut final_accuracy = Vec::with_capacity(seeds.len());
        let mut status = RowStatus::Ran;
        for _ in seeds {
            match outcomes.next().expect("one outcome per job") {
                Ok((s, acc)) => {
                    per_seed.push(s);
                    final_accuracy.push(acc);
                }
                Err(HarnessError::Scheduler(e @ SchedulerError::StateSpaceTooLarge { .. }))
                    if kind != SchedulerKind::Cyclic =>
                {
                    status = RowStatus::NotRun(e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
        if status != RowStatus::Ran {
            per_seed.clear();
            final_accuracy.clear();
        }
        rows.push(ComparisonRow {
            scheduler: kind,
            status,
            median: median(&per_seed),
            per_seed,
            final_accuracy,
            ratio: None,
        });
    }
    let baseline = rows
        .iter()
        .find(|r| r.scheduler == SchedulerKind::Cyclic)
        .expect("checked above")
        .median;
    for row in rows.iter_mut().filter(|r| r.status == RowStatus::Ran) {
        row.ratio = Some(ratio(baseline, row.median));
    }
    Ok(ComparisonTable {
        seeds: seeds.to_vec(),
        target_accuracy: cfg.target_accuracy,
        rows,
    })
}

fn fmt_samples(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".to_string(), |m| m.to_string())
}

fn fmt_ratio(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.3}")
    }
}

impl ComparisonTable {
    /// `scheduler,status,median_samples,ratio,reached,runs`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scheduler,status,median_samples,ratio,reached,runs\n");
        for r in &self.rows {
            match &r.status {
                RowStatus::Ran => {
                    let reached = r.per_seed.iter().filter(|x| x.is_some()).count();
                    let _ = writeln!(
                        s,
                        "{},ran,{},{},{},{}",
                        r.scheduler,
                        fmt_samples(r.median),
                        fmt_ratio(r.ratio.unwrap_or(0.0)),
                        reached,
                        r.per_seed.len()
                    );
                }
                RowStatus::NotRun(_) => {
                    let _ = writeln!(s, "{},not run,,,0,0", r.scheduler);
                }
            }
        }
        s
    }

    /// `scheduler,seed,samples_to_target,final_accuracy`.
    pub fn runs_csv(&self) -> String {
        let mut s = String::from("scheduler,seed,samples_to_target,final_accuracy\n");
        for r in &self.rows {
            for ((seed, v), acc) in self.seeds.iter().zip(&r.per_seed).zip(&r.final_accuracy) {
                let samples = v.map_or_else(|| "inf".to_string(), |x| x.to_string());
                let _ = writeln!(s, "{},{seed},{samples},{acc}", r.scheduler);
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "target accuracy {} over {} seed(s), ratios relative to cyclic\n\n{:<10} {:>16} {:>8} {:>9}\n",
            self.target_accuracy,
            self.seeds.len(),
            "scheduler",
            "median samples",
            "ratio",
            "reached"
        );
        for r in &self.rows {
            match &r.status {
                RowStatus::Ran => {
                    let reached = r.per_seed.iter().filter(|x| x.is_some()).count();
                    let median = r.median.map_or_else(|| "∞".to_string(), |m| m.to_string());
                    let ratio = r.ratio.map_or_else(String::new, |v| {
                        if v.is_infinite() {
                            "∞".into()
                        } else {
                            format!("{v:.3}")
                        }
                    });
                    let _ = writeln!(
                        s,
                        "{:<10} {:>16} {:>8} {:>6}/{}",
                        r.scheduler,
                        median,
                        ratio,
                        reached,
                        r.per_seed.len()
                    );
                }
                RowStatus::NotRun(reason) => {
                    let _ = writeln!(
                        s,
                        "{:<10} {:>16} {:>8}   ({reason})",
                        r.scheduler, "not run", "/"
                    );
                }
            }
        }
        s
    }
}

/// Writes `compare.csv`, `compare_runs.csv` and `compare.txt`.
pub fn write_comparison(dir: &Path, table: &ComparisonTable) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    for (name, text) in [
        ("compare.csv", table.to_csv()),
        ("compare_runs.csv", table.runs_csv()),
        ("compare.txt", table.to_text()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::parse(
            "data = \"synthetic\"\nscheduler = \"cyclic\"\nseed = 1\nsynthetic_train = 100\nsynthetic_val = 30\nouter_epochs = 1\ntarget_accuracy = 0.5\n",
        )
        .unwrap()
    }

    #[test]
    fn median_and_ratio_rules() {
        assert_eq!(median(&[Some(3), None, Some(1)]), Some(3.0));
        assert_eq!(median(&[Some(3), Some(1)]), Some(2.0));
        assert_eq!(median(&[None, Some(1)]), None);
        assert_eq!(ratio(Some(10.0), Some(10.0)), 1.0);
        assert_eq!(ratio(Some(10.0), None), 0.0);
        assert_eq!(ratio(None, Some(5.0)), f64::INFINITY);
        assert_eq!(ratio(None, None), 0.0);
    }

    #[test]
    fn baseline_required() {
        assert!(matches!(
            compare_schedulers(&cfg(), &[SchedulerKind::Ucb], &[1]),
            Err(HarnessError::BaselineMissing)
        ));
    }

    #[test]
    fn baseline_ratio_is_one_and_order_does_not_matter() {
        let a = compare_schedulers(
            &cfg(),
            &[SchedulerKind::Cyclic, SchedulerKind::Gittins],
            &[1, 2],
        )
        .unwrap();
        let b = compare_schedulers(
            &cfg(),
            &[
                SchedulerKind::Gittins,
                SchedulerKind::Cyclic,
                SchedulerKind::Gittins,
            ],
            &[1, 2],
        )
        .unwrap();
        assert_eq!(a, b);
        let cyc = a.row(SchedulerKind::Cyclic).unwrap();
        if cyc.median.is_some() {
            assert_eq!(cyc.ratio, Some(1.0));
        }
        assert!(a
            .to_csv()
            .starts_with("scheduler,status,median_samples,ratio,reached,runs\ncyclic,ran,"));
    }

    #[test]
    fn oversized_mdp_is_not_run() {
        let mut c = cfg();
        c.mdp_state_cap = 8;
        let t = compare_schedulers(&c, &[SchedulerKind::Cyclic, SchedulerKind::Mdp], &[1]).unwrap();
        let row = t.row(SchedulerKind::Mdp).unwrap();
        assert!(matches!(row.status, RowStatus::NotRun(_)));
        assert_eq!(row.ratio, None);
        assert!(t.to_csv().contains("mdp,not run,,,0,0"));
        assert!(t.to_text().contains("not run"));
    }
}
