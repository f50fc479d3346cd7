/// Cumulative regret `R_T = T·μ* − Σ_{t≤T} r_t` for every prefix length `T`.
pub fn regret_trace(rewards: &[f64], best_mean: f64) -> Vec<f64> {
    let mut total = 0.0;
    rewards
        .iter()
        .enumerate()
        .map(|(t, &r)| {
            total += r;
            (t + 1) as f64 * best_mean - total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedulers::{Scheduler, UcbState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn best_arm_has_no_regret() {
        assert!(regret_trace(&[0.7; 50], 0.7)
            .iter()
            .all(|&r| r.abs() < 1e-12));
    }

    #[test]
    fn constant_gap_grows_linearly() {
        let trace = regret_trace(&[0.5; 10], 0.75);
        for (t, r) in trace.iter().enumerate() {
            assert!((r - 0.25 * (t + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn ucb_average_regret_shrinks() {
        let means = [0.2, 0.35, 0.5, 0.65, 0.8];
        let mut avg = [0.0; 2];
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |arm: usize| {
                if rng.random_bool(means[arm]) {
                    1.0
                } else {
                    0.0
                }
            };
            let probe: Vec<f64> = (0..5).map(&mut draw).collect();
            let mut ucb = UcbState::new(&probe, 2.0, 2.0).unwrap();
            // expected-reward regret avoids Bernoulli noise in the trace
            let mut expected = Vec::new();
            for _ in 0..10_000 {
                let arm = ucb.select(&[Some(0); 5]).unwrap();
                expected.push(means[arm]);
                ucb.observe(arm, draw(arm));
            }
            let trace = regret_trace(&expected, 0.8);
            avg[0] += trace[999] / 1000.0;
            avg[1] += trace[9999] / 10_000.0;
        }
        assert!(avg[1] < avg[0]);
    }
}
