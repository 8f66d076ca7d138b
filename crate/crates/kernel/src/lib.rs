//! A deterministic synchronous-reactive scheduler.
//!
//! Time is a sequence of global *instants*. During an instant every runnable
//! behavior is stepped cooperatively until it suspends on one of the kernel
//! primitives:
//!
//! * [`Step::Await`] resumes in the first instant where the event is
//!   generated (immediately if it already is present in the current one);
//! * [`Step::Collect`] resumes at the start of the next instant carrying
//!   every value generated on the event during the current one;
//! * [`Step::Cooperate`] resumes at the start of the next instant;
//! * [`Step::Terminate`] removes the behavior.
//!
//! Events are broadcast: generating one wakes every behavior awaiting it in
//! the same instant. Their presence and values are scoped to one instant.
//!
//! Each instant has two phases. The *active* phase runs micro-steps until
//! nothing is runnable; the *end-of-instant* phase hands collected values to
//! their collectors, clears every event buffer and admits spawned behaviors.
//! Behaviors only observe absence through [`Step::Collect`], which resumes
//! after the instant is over, so no behavior can react to absence within the
//! instant where it happens.
//!
//! Dispatch is FIFO by readiness; behaviors that become ready together (at
//! the instant boundary, or woken by the same generation) are ordered by
//! [`BehaviorId`], which increases with spawn order. Two runs fed with the
//! same behaviors therefore produce identical traces.

mod behavior;
mod scheduler;

pub use behavior::{Behavior, BehaviorState, Cx, Step};
pub use scheduler::{InstantReport, KernelConfig, Scheduler, TraceEntry};

use std::fmt;

/// Global logical time. Incremented by one per completed instant.
pub type Instant = u64;

/// Handle to a broadcast event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub(crate) u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Handle to a behavior. Ids are allocated in spawn order and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BehaviorId(pub(crate) u32);

impl BehaviorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BehaviorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    /// The active phase of an instant did not settle within the micro-step budget.
    #[error("instant {instant} diverged: behavior {behavior} exceeded the budget of {budget} micro-steps")]
    Divergence {
        instant: Instant,
        behavior: BehaviorId,
        budget: u64,
    },
    #[error("event {event} generated outside the active phase of an instant")]
    GenerateOutsideActivePhase { event: EventId },
    #[error("unknown event {0}")]
    UnknownEvent(EventId),
}
