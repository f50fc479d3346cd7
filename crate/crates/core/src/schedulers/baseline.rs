use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scheduler, SchedulerError, SchedulerKind};

/// Round-robin over tasks, skipping exhausted ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicScheduler {
    next: usize,
}

impl CyclicScheduler {
    pub fn new() -> Self {
        Self { next: 0 }
    }
}

impl Default for CyclicScheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl Scheduler for CyclicScheduler {
    fn kind(&self) -> SchedulerKind {
        SchedulerKind::Cyclic
    }

    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        let n = upcoming.len();
        for k in 0..n {
            let i = (self.next + k) % n;
            if upcoming[i].is_some() {
                self.next = (i + 1) % n;
                return Ok(i);
            }
        }
        Err(SchedulerError::AllExhausted)
    }
}

/// Uniform choice among non-exhausted tasks from a seeded stream.
#[derive(Debug, Clone)]
pub struct RandomScheduler {
    rng: ChaCha8Rng,
}

impl RandomScheduler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Scheduler for RandomScheduler {
    fn kind(&self) -> SchedulerKind {
        SchedulerKind::Random
    }

    fn select(&mut self, upcoming: &[Option<usize>]) -> Result<usize, SchedulerError> {
        let open: Vec<usize> = (0..upcoming.len())
            .filter(|&i| upcoming[i].is_some())
            .collect();
        if open.is_empty() {
            return Err(SchedulerError::AllExhausted);
        }
        Ok(open[self.rng.random_range(0..open.len())])
    }
}
