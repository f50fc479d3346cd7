use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ensure_dir, io_err, HarnessError};
use crate::learner::MetricsRecord;

/// Fewest metrics records a report accepts.
pub const MIN_STEPS: usize = 50;
/// Inner steps `t` inside this window enter the statistics.
pub const WINDOW: (usize, usize) = (20, 120);
/// Width of the leading and trailing sub-windows compared by the trend.
pub const SUBWINDOW: usize = 20;
/// A series is flagged when its coefficient of variation exceeds this.
pub const CV_LIMIT: f64 = 0.3;
/// A series is flagged when its trend ratio differs from 1 by more than this.
pub const TREND_LIMIT: f64 = 0.5;

/// Statistics of `√t·e_t` for one (chosen task, upcoming class) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub task: usize,
    pub class: usize,
    pub points: usize,
    pub window_points: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Population standard deviation over mean inside the window.
    pub cv: Option<f64>,
    /// Mean over the trailing sub-window over mean over the leading one.
    pub trend: Option<f64>,
    pub non_stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub series: Vec<SeriesStats>,
}

impl StationarityReport {
    /// Series with enough in-window points to have a coefficient of variation.
    pub fn measured(&self) -> impl Iterator<Item = &SeriesStats> {
        self.series.iter().filter(|s| s.cv.is_some())
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let mut s =
            String::from("task,class,points,window_points,mean,std,cv,trend,non_stationary\n");
        for r in &self.series {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.task,
                r.class,
                r.points,
                r.window_points,
                opt(r.mean),
                opt(r.std),
                opt(r.cv),
                opt(r.trend),
                r.non_stationary
            );
        }
        s
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups `√t·e_t` by (task, class) and measures how constant each series is
/// over the step window.
pub fn stationarity_report(records: &[MetricsRecord]) -> Result<StationarityReport, HarnessError> {
    if records.len() < MIN_STEPS {
        return Err(HarnessError::TooFewSteps {
            steps: records.len(),
            needed: MIN_STEPS,
        });
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.task, r.class)).or_default().push(r);
    }
    let (lo, hi) = WINDOW;
    let series = groups
        .into_iter()
        .map(|((task, class), recs)| {
            let in_window: Vec<f64> = recs
                .iter()
                .filter(|r| (lo..=hi).contains(&r.inner_t))
                .map(|r| r.sqrt_t_error)
                .collect();
            let head: Vec<f64> = recs
                .iter()
                .filter(|r| (lo..lo + SUBWINDOW).contains(&r.inner_t))
                .map(|r| r.sqrt_t_error)
                .collect();
            let tail: Vec<f64> = recs
                .iter()
                .filter(|r| (hi + 1 - SUBWINDOW..=hi).contains(&r.inner_t))
                .map(|r| r.sqrt_t_error)
                .collect();
            let m = mean(&in_window);
            let std = m.filter(|_| in_window.len() >= 2).map(|m| {
                (in_window.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / in_window.len() as f64)
                    .sqrt()
            });
            let cv = match (m, std) {
                (Some(m), Some(s)) if m > 0.0 => Some(s / m),
                (Some(_), Some(0.0)) => Some(0.0),
                _ => None,
            };
            let trend = match (mean(&head), mean(&tail)) {
                (Some(h), Some(t)) if h > 0.0 => Some(t / h),
                (Some(h), Some(t)) if h == 0.0 && t == 0.0 => Some(1.0),
                _ => None,
            };
            let non_stationary = cv.is_some_and(|c| c > CV_LIMIT)
                || trend.is_some_and(|t| (t - 1.0).abs() > TREND_LIMIT);
            SeriesStats {
                task,
                class,
                points: recs.len(),
                window_points: in_window.len(),
                mean: m,
                std,
                cv,
                trend,
                non_stationary,
            }
        })
        .collect();
    Ok(StationarityReport { series })
}

/// Writes `stationarity.csv` (one row per series) and
/// `stationarity_series.csv` (every point, for plotting).
pub fn write_stationarity(
    dir: &Path,
    report: &StationarityReport,
    records: &[MetricsRecord],
) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    let path = dir.join("stationarity.csv");
    std::fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
    let mut s = String::from("task,class,outer_k,inner_t,sqrt_t_error\n");
    let mut sorted: Vec<&MetricsRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.task, r.class, r.outer_k, r.inner_t));
    for r in sorted {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.task, r.class, r.outer_k, r.inner_t, r.sqrt_t_error
        );
    }
    let path = dir.join("stationarity_series.csv");
    std::fs::write(&path, s).map_err(io_err(&path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(error: impl Fn(usize) -> f64) -> Vec<MetricsRecord> {
        (1..=150)
            .map(|t| {
                let e = error(t);
                MetricsRecord {
                    outer_k: 1,
                    inner_t: t,
                    task: 0,
                    class: 0,
                    accuracy: 1.0 - e,
                    reward: 1.0 - (t as f64).sqrt() * e,
                    sqrt_t_error: (t as f64).sqrt() * e,
                    samples: t as u64,
                }
            })
            .collect()
    }

    #[test]
    fn decaying_error_is_stationary() {
        let report = stationarity_report(&trace(|t| 0.4 / (t as f64).sqrt())).unwrap();
        let s = &report.series[0];
        assert!(s.cv.unwrap() < 1e-12);
        assert!((s.trend.unwrap() - 1.0).abs() < 1e-12);
        assert!(!s.non_stationary);
        assert_eq!(s.window_points, 101);
    }

    #[test]
    fn constant_error_is_flagged() {
        let report = stationarity_report(&trace(|_| 0.2)).unwrap();
        let s = &report.series[0];
        assert!(s.cv.unwrap() > 0.1);
        assert!(s.trend.unwrap() > 1.5);
        assert!(s.non_stationary);
    }

    #[test]
    fn cv_matches_direct_recomputation() {
        let recs = trace(|t| 0.1 + 0.05 * ((t as f64) * 0.3).sin().abs());
        let report = stationarity_report(&recs).unwrap();
        let xs: Vec<f64> = recs
            .iter()
            .filter(|r| (20..=120).contains(&r.inner_t))
            .map(|r| r.sqrt_t_error)
            .collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n - m * m;
        assert!((report.series[0].cv.unwrap() - var.sqrt() / m).abs() < 1e-9);
    }

    #[test]
    fn too_few_steps() {
        let recs = trace(|_| 0.1);
        assert!(matches!(
            stationarity_report(&recs[..10]),
            Err(HarnessError::TooFewSteps {
                steps: 10,
                needed: 50
            })
        ));
    }
}
