use rqm_kernel::{Instant, InstantReport, KernelError, Scheduler};

use crate::scenario::SourceRecord;
use crate::world::{Payload, World};

/// A scheduler and the world its behaviors share.
pub struct Simulation {
    pub scheduler: Scheduler<World, Payload>,
    pub world: World,
    pub sources: Vec<SourceRecord>,
}

impl Simulation {
    pub fn new(scheduler: Scheduler<World, Payload>, world: World, sources: Vec<SourceRecord>) -> Self {
        Self {
            scheduler,
            world,
            sources,
        }
    }

    /// Number of the next instant to run.
    pub fn now(&self) -> Instant {
        self.scheduler.now()
    }

    pub fn step(&mut self) -> Result<InstantReport, KernelError> {
        self.scheduler.run_instant(&mut self.world)
    }

    /// Runs `n` instants.
    pub fn run(&mut self, n: u64) -> Result<(), KernelError> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    /// No shot left to fire, no living cell, no reduction in flight. Nothing
    /// can be displayed or detected any more; only particles may still move.
    pub fn is_settled(&self) -> bool {
        self.world.shots_remaining == 0 && self.world.living == 0 && self.world.reducing == 0
    }
}
