//! Emission: firing a cell, standard and entangled sources, and the go
//! drivers that pace them.

use rqm_kernel::{Behavior, EventId, Step};

use crate::world::{Activation, BasicState, CellKind, MeasurementContext, Payload, StateSlot, World, WorldCx};

/// Static description of one source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceRecord {
    pub x: u32,
    pub y: u32,
    pub direction: CellKind,
    pub state: BasicState,
    pub entangled: bool,
    pub go: EventId,
}

impl SourceRecord {
    /// The cell next to the source in `direction`.
    pub fn adjacent(&self, direction: CellKind) -> (u32, u32) {
        (self.x, (self.y as i64 + direction.dy()) as u32)
    }
}

/// Triggers the cell at `(x, y)` with a new superposition of state `state`
/// moving in `direction`. The signal event and the chosen holder are always
/// fresh; `r` and `chosen_state` are the caller's.
pub fn fire(
    cx: &mut WorldCx<'_>,
    (x, y): (u32, u32),
    state: BasicState,
    direction: CellKind,
    r: EventId,
    chosen_state: StateSlot,
) -> MeasurementContext {
    let signal = cx.new_event();
    let chosen = cx.world.new_chosen();
    let ctx = MeasurementContext {
        r,
        signal,
        chosen,
        chosen_state,
    };
    let trigger = cx.world.grid.cell(x, y).trigger;
    cx.generate(
        trigger,
        Payload::Activation(Activation {
            kind: direction,
            state,
            ctx,
        }),
    );
    ctx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SourcePhase {
    Waiting,
    Fired,
}

/// Fires a fresh superposition every time `go` is present.
pub struct SourceBehavior {
    src: SourceRecord,
    phase: SourcePhase,
}

impl SourceBehavior {
    pub fn new(src: SourceRecord) -> Self {
        Self {
            src,
            phase: SourcePhase::Waiting,
        }
    }
}

impl Behavior<World, Payload> for SourceBehavior {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        match self.phase {
            SourcePhase::Waiting => {
                self.phase = SourcePhase::Fired;
                Step::Await(self.src.go)
            }
            SourcePhase::Fired => {
                let r = cx.new_event();
                let holder = cx.world.new_chosen_state();
                let target = self.src.adjacent(self.src.direction);
                fire(cx, target, self.src.state, self.src.direction, r, holder);
                self.phase = SourcePhase::Waiting;
                Step::Cooperate
            }
        }
    }
}

/// Fires two superpositions in opposite directions on every `go`. They
/// share their R event and chosen-state holder.
pub struct DualSourceBehavior {
    src: SourceRecord,
    shared: Option<(EventId, StateSlot)>,
}

impl DualSourceBehavior {
    pub fn new(src: SourceRecord) -> Self {
        Self { src, shared: None }
    }
}

impl Behavior<World, Payload> for DualSourceBehavior {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        match self.shared.take() {
            None => {
                let r = cx.new_event();
                let holder = cx.world.new_chosen_state();
                self.shared = Some((r, holder));
                Step::Await(self.src.go)
            }
            Some((r, holder)) => {
                let dir = self.src.direction;
                let inv = dir.opposite();
                fire(cx, self.src.adjacent(dir), self.src.state, dir, r, holder);
                fire(cx, self.src.adjacent(inv), self.src.state, inv, r, holder);
                Step::Cooperate
            }
        }
    }
}

/// Generates every `go` event at `start`, `start + period`, ... `shots`
/// times, then terminates.
pub struct ScheduleGo {
    go: Vec<EventId>,
    period: u64,
    remaining: u64,
    next_at: u64,
}

impl ScheduleGo {
    /// `period` must be at least 1.
    pub fn new(go: Vec<EventId>, period: u64, shots: u64, start: u64) -> Self {
        debug_assert!(period >= 1);
        Self {
            go,
            period: period.max(1),
            remaining: shots,
            next_at: start,
        }
    }
}

impl Behavior<World, Payload> for ScheduleGo {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        if self.remaining == 0 {
            return Step::Terminate;
        }
        if cx.now() >= self.next_at {
            for &go in &self.go {
                cx.generate(go, Payload::Unit);
            }
            self.remaining -= 1;
            cx.world.shots_remaining -= 1;
            self.next_at += self.period;
            if self.remaining == 0 {
                return Step::Terminate;
            }
        }
        Step::Cooperate
    }
}
