use crate::scheduler::Core;
use crate::{BehaviorId, EventId, Instant};

/// What a behavior asks the scheduler for when it suspends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Resume in the first instant where the event is present.
    Await(EventId),
    /// Resume at the start of the next instant with every value generated on
    /// the event during this one. Read them with [`Cx::take_collected`].
    Collect(EventId),
    /// Resume at the start of the next instant.
    Cooperate,
    Terminate,
}

/// Scheduling state of a behavior, as seen from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorState {
    Running,
    WaitingEvent(EventId),
    WaitingCollect(EventId),
    WaitingNextInstant,
    Terminated,
}

/// A resumable cooperative activity.
///
/// `step` runs from the current resumption point up to the next suspension
/// point and reports it. Implementations keep their own continuation, usually
/// as an enum of phases.
pub trait Behavior<W, V> {
    fn step(&mut self, cx: &mut Cx<'_, W, V>) -> Step;
}

impl<W, V, F> Behavior<W, V> for F
where
    F: FnMut(&mut Cx<'_, W, V>) -> Step,
{
    fn step(&mut self, cx: &mut Cx<'_, W, V>) -> Step {
        self(cx)
    }
}

/// The handle a behavior gets while it runs.
pub struct Cx<'a, W, V> {
    /// Shared state owned by the caller of [`crate::Scheduler::run_instant`].
    pub world: &'a mut W,
    pub(crate) core: &'a mut Core<W, V>,
    pub(crate) me: BehaviorId,
    pub(crate) inbox: &'a mut Vec<V>,
}

impl<W, V: Clone> Cx<'_, W, V> {
    pub fn now(&self) -> Instant {
        self.core.clock
    }

    pub fn me(&self) -> BehaviorId {
        self.me
    }

    /// Broadcasts `value` on `event` for the rest of the instant. Every
    /// behavior awaiting `event` becomes runnable in this instant.
    pub fn generate(&mut self, event: EventId, value: V) {
        self.core.push_value(event, value, self.me);
    }

    pub fn is_present(&self, event: EventId) -> bool {
        self.core.events[event.index()].present
    }

    pub fn new_event(&mut self) -> EventId {
        self.core.new_event()
    }

    /// Queues a behavior; it takes its first step at the start of the next
    /// instant.
    pub fn spawn(&mut self, behavior: Box<dyn Behavior<W, V>>) -> BehaviorId {
        self.core.spawn(behavior)
    }

    /// Values delivered by the last [`Step::Collect`]. Empty when the event
    /// was absent, or when called a second time.
    pub fn take_collected(&mut self) -> Vec<V> {
        std::mem::take(self.inbox)
    }
}
