use metasched::harness::{
    compare_schedulers, read_metrics_csv, run_experiment, write_metrics_csv, ExperimentConfig,
    METRICS_HEADER,
};
use metasched::schedulers::SchedulerKind;

fn cfg(scheduler: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "data = \"synthetic\"\nscheduler = \"{scheduler}\"\nseed = 21\nsynthetic_tasks = 2\n\
         synthetic_train = 200\nsynthetic_val = 40\nouter_epochs = 2\n"
    ))
    .unwrap()
}

#[test]
fn metrics_header_is_frozen() {
    assert_eq!(
        METRICS_HEADER,
        "outer_k,inner_t,task,class,accuracy,reward,sqrt_t_error,samples"
    );
}

#[test]
fn metrics_are_ordered_and_round_trip_exactly() {
    let out = run_experiment(&cfg("gittins"), None).unwrap();
    let keys: Vec<(usize, usize)> = out.metrics.iter().map(|r| (r.outer_k, r.inner_t)).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    assert!(out.metrics.windows(2).all(|w| w[0].samples < w[1].samples));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_metrics_csv(&path, &out.metrics).unwrap();
    let back = read_metrics_csv(&path).unwrap();
    for (a, b) in out.metrics.iter().zip(&back) {
        assert_eq!(a.accuracy.to_bits(), b.accuracy.to_bits());
        assert_eq!(a.reward.to_bits(), b.reward.to_bits());
        assert_eq!(a.sqrt_t_error.to_bits(), b.sqrt_t_error.to_bits());
    }
    assert_eq!(back, out.metrics);
}

#[test]
fn summary_respects_invariants() {
    for kind in SchedulerKind::ALL {
        let out = run_experiment(&cfg(kind.as_str()), None).unwrap();
        let s = &out.summary;
        assert_eq!(s.scheduler, kind);
        if let Some(n) = s.samples_to_target {
            assert!(n <= s.total_samples);
        }
        assert_eq!(s.total_samples, out.metrics.last().map_or(0, |r| r.samples));
    }
}

#[test]
fn config_round_trips_through_text() {
    let original = ExperimentConfig::parse(
        "data = \"synthetic\"\nscheduler = \"ucb\"\nseed = 4\nucb_u = 0.5\nsynthetic_noise = [0.5, 2.0]\n\
         synthetic_tasks = 2\ninner_steps = 30\narchitecture = \"hidden\"\nhidden_units = 8\n",
    )
    .unwrap();
    let again = ExperimentConfig::parse(&original.to_toml()).unwrap();
    assert_eq!(again, original);
    assert_eq!(again.to_toml(), original.to_toml());
}

#[test]
fn comparison_ignores_listing_order() {
    let c = cfg("cyclic");
    let a = compare_schedulers(
        &c,
        &[
            SchedulerKind::Cyclic,
            SchedulerKind::Ucb,
            SchedulerKind::Random,
        ],
        &[1, 2, 3],
    )
    .unwrap();
    let b = compare_schedulers(
        &c,
        &[
            SchedulerKind::Random,
            SchedulerKind::Cyclic,
            SchedulerKind::Ucb,
        ],
        &[1, 2, 3],
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}
