use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::FutureId;

/// How the acting thread is chosen among the enabled ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerPolicy {
    /// Most recently created enabled thread.
    PaperOrder,
    /// Cycle through thread ids in ascending order.
    RoundRobin,
    SeededRandom(u64),
}

#[derive(Debug)]
pub struct Scheduler {
    policy: SchedulerPolicy,
    last: Option<FutureId>,
    rng: Option<ChaCha8Rng>,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy) -> Self {
        let rng = match policy {
            SchedulerPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self {
            policy,
            last: None,
            rng,
        }
    }

    pub fn policy(&self) -> SchedulerPolicy {
        self.policy
    }

    /// `enabled` must be non-empty and in configuration order.
    pub fn pick(&mut self, enabled: &[FutureId]) -> FutureId {
        assert!(!enabled.is_empty(), "scheduler asked to pick from nothing");
        let choice = match self.policy {
            SchedulerPolicy::PaperOrder => enabled[0],
            SchedulerPolicy::RoundRobin => {
                let after = enabled.iter().filter(|id| Some(**id) > self.last).min();
                *after.unwrap_or_else(|| enabled.iter().min().expect("non-empty"))
            }
            SchedulerPolicy::SeededRandom(_) => {
                let rng = self.rng.as_mut().expect("seeded policy has an rng");
                enabled[rng.random_range(0..enabled.len())]
            }
        };
        self.last = Some(choice);
        choice
    }
}
