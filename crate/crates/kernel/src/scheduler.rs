use std::collections::VecDeque;

use crate::behavior::{Behavior, BehaviorState, Cx, Step};
use crate::{BehaviorId, EventId, Instant, KernelError};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    /// Maximum number of micro-steps in the active phase of one instant.
    pub step_budget: u64,
    /// Record every generation in a trace (see [`Scheduler::trace`]).
    pub trace: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            step_budget: DEFAULT_STEP_BUDGET,
            trace: false,
        }
    }
}

/// Summary of one completed instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstantReport {
    pub instant: Instant,
    /// Behaviors alive after the instant, including those admitted for the next one.
    pub live: usize,
    pub terminated: usize,
    /// Number of `generate` calls.
    pub generated: u64,
    pub micro_steps: u64,
}

/// One generation, in dispatch order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    pub instant: Instant,
    pub event: EventId,
    pub emitter: BehaviorId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    Idle,
    Active,
    EndOfInstant,
}

pub(crate) struct EventSlot<V> {
    pub(crate) values: Vec<V>,
    pub(crate) present: bool,
    waiters: Vec<BehaviorId>,
}

/// Everything a running behavior may touch, split from the behavior table so
/// that a behavior can be stepped while the rest of the scheduler is borrowed.
pub(crate) struct Core<W, V> {
    pub(crate) clock: Instant,
    phase: Phase,
    pub(crate) events: Vec<EventSlot<V>>,
    dirty: Vec<EventId>,
    run_queue: VecDeque<BehaviorId>,
    next_instant: Vec<BehaviorId>,
    collectors: Vec<(BehaviorId, EventId)>,
    spawned: Vec<(BehaviorId, Box<dyn Behavior<W, V>>)>,
    next_id: u32,
    generated: u64,
    trace: Option<Vec<TraceEntry>>,
}

impl<W, V: Clone> Core<W, V> {
    pub(crate) fn new_event(&mut self) -> EventId {
        let id = EventId(self.events.len() as u32);
        self.events.push(EventSlot {
            values: Vec::new(),
            present: false,
            waiters: Vec::new(),
        });
        id
    }

    pub(crate) fn spawn(&mut self, behavior: Box<dyn Behavior<W, V>>) -> BehaviorId {
        let id = BehaviorId(self.next_id);
        self.next_id += 1;
        self.spawned.push((id, behavior));
        id
    }

    fn generate(&mut self, event: EventId, value: V, emitter: BehaviorId) -> Result<(), KernelError> {
        if event.index() >= self.events.len() {
            return Err(KernelError::UnknownEvent(event));
        }
        if self.phase != Phase::Active {
            return Err(KernelError::GenerateOutsideActivePhase { event });
        }
        self.push_value(event, value, emitter);
        Ok(())
    }

    pub(crate) fn push_value(&mut self, event: EventId, value: V, emitter: BehaviorId) {
        debug_assert_eq!(self.phase, Phase::Active);
        let slot = &mut self.events[event.index()];
        slot.values.push(value);
        if !slot.present {
            slot.present = true;
            self.dirty.push(event);
        }
        if !slot.waiters.is_empty() {
            let mut woken = std::mem::take(&mut slot.waiters);
            woken.sort_unstable();
            self.run_queue.extend(woken);
        }
        self.generated += 1;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry {
                instant: self.clock,
                event,
                emitter,
            });
        }
    }
}

struct Slot<W, V> {
    behavior: Option<Box<dyn Behavior<W, V>>>,
    state: BehaviorState,
    inbox: Vec<V>,
}

/// Runs behaviors over a world of type `W`; events carry values of type `V`.
///
/// The scheduler does not own the world: it is lent to every
/// [`Scheduler::run_instant`] call and exposed to behaviors through
/// [`Cx::world`].
pub struct Scheduler<W, V> {
    core: Core<W, V>,
    slots: Vec<Slot<W, V>>,
    live: usize,
    config: KernelConfig,
}

impl<W, V: Clone> Default for Scheduler<W, V> {
    fn default() -> Self {
        Self::new(KernelConfig::default())
    }
}

impl<W, V: Clone> Scheduler<W, V> {
    pub fn new(config: KernelConfig) -> Self {
        Self {
            core: Core {
                clock: 0,
                phase: Phase::Idle,
                events: Vec::new(),
                dirty: Vec::new(),
                run_queue: VecDeque::new(),
                next_instant: Vec::new(),
                collectors: Vec::new(),
                spawned: Vec::new(),
                next_id: 0,
                generated: 0,
                trace: config.trace.then(Vec::new),
            },
            slots: Vec::new(),
            live: 0,
            config,
        }
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    /// Index of the next instant to run.
    pub fn now(&self) -> Instant {
        self.core.clock
    }

    pub fn new_event(&mut self) -> EventId {
        self.core.new_event()
    }

    /// Queues a behavior from outside; it starts in the next instant run.
    pub fn spawn(&mut self, behavior: Box<dyn Behavior<W, V>>) -> BehaviorId {
        let id = self.core.spawn(behavior);
        self.admit_spawned();
        id
    }

    /// Generation from outside a behavior. Always rejected: between two
    /// instants the scheduler is past the end of the previous one, and
    /// generations are only meaningful during an active phase. Inputs from
    /// the environment go through a behavior instead.
    pub fn generate(&mut self, event: EventId, value: V) -> Result<(), KernelError> {
        self.core.generate(event, value, BehaviorId(u32::MAX))
    }

    pub fn is_present(&self, event: EventId) -> bool {
        self.core.events[event.index()].present
    }

    /// Values generated on `event` in the current instant. Always empty
    /// between instants.
    pub fn values(&self, event: EventId) -> &[V] {
        &self.core.events[event.index()].values
    }

    pub fn event_count(&self) -> usize {
        self.core.events.len()
    }

    pub fn live(&self) -> usize {
        self.live
    }

    pub fn state(&self, id: BehaviorId) -> Option<BehaviorState> {
        self.slots.get(id.index()).map(|s| s.state)
    }

    pub fn trace(&self) -> Option<&[TraceEntry]> {
        self.core.trace.as_deref()
    }

    fn admit_spawned(&mut self) {
        for (id, behavior) in self.core.spawned.drain(..) {
            debug_assert_eq!(id.index(), self.slots.len());
            self.slots.push(Slot {
                behavior: Some(behavior),
                state: BehaviorState::WaitingNextInstant,
                inbox: Vec::new(),
            });
            self.core.next_instant.push(id);
            self.live += 1;
        }
    }

    /// Runs one full instant: the active phase, then the end-of-instant
    /// phase, then advances the clock.
    pub fn run_instant(&mut self, world: &mut W) -> Result<InstantReport, KernelError> {
        let instant = self.core.clock;
        let generated_before = self.core.generated;
        let mut ready = std::mem::take(&mut self.core.next_instant);
        ready.sort_unstable();
        self.core.run_queue.extend(ready);
        self.core.phase = Phase::Active;

        let mut micro_steps = 0u64;
        let mut terminated = 0usize;
        while let Some(id) = self.core.run_queue.pop_front() {
            loop {
                micro_steps += 1;
                if micro_steps > self.config.step_budget {
                    self.core.phase = Phase::Idle;
                    return Err(KernelError::Divergence {
                        instant,
                        behavior: id,
                        budget: self.config.step_budget,
                    });
                }
                let slot = &mut self.slots[id.index()];
                let Some(mut behavior) = slot.behavior.take() else {
                    break;
                };
                slot.state = BehaviorState::Running;
                let step = {
                    let mut cx = Cx {
                        world: &mut *world,
                        core: &mut self.core,
                        me: id,
                        inbox: &mut slot.inbox,
                    };
                    behavior.step(&mut cx)
                };
                self.admit_spawned();
                let slot = &mut self.slots[id.index()];
                match step {
                    Step::Await(event) => {
                        slot.behavior = Some(behavior);
                        let ev = &mut self.core.events[event.index()];
                        if ev.present {
                            continue;
                        }
                        ev.waiters.push(id);
                        slot.state = BehaviorState::WaitingEvent(event);
                    }
                    Step::Collect(event) => {
                        slot.behavior = Some(behavior);
                        slot.state = BehaviorState::WaitingCollect(event);
                        self.core.collectors.push((id, event));
                    }
                    Step::Cooperate => {
                        slot.behavior = Some(behavior);
                        slot.state = BehaviorState::WaitingNextInstant;
                        self.core.next_instant.push(id);
                    }
                    Step::Terminate => {
                        slot.state = BehaviorState::Terminated;
                        slot.inbox = Vec::new();
                        self.live -= 1;
                        terminated += 1;
                    }
                }
                break;
            }
        }

        self.core.phase = Phase::EndOfInstant;
        for (id, event) in std::mem::take(&mut self.core.collectors) {
            let slot = &mut self.slots[id.index()];
            slot.inbox.clear();
            slot.inbox.extend_from_slice(&self.core.events[event.index()].values);
            slot.state = BehaviorState::WaitingNextInstant;
            self.core.next_instant.push(id);
        }
        for event in self.core.dirty.drain(..) {
            let ev = &mut self.core.events[event.index()];
            ev.values.clear();
            ev.present = false;
        }
        self.core.phase = Phase::Idle;
        self.core.clock += 1;

        Ok(InstantReport {
            instant,
            live: self.live,
            terminated,
            generated: self.core.generated - generated_before,
            micro_steps,
        })
    }
}
