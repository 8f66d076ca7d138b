//! Detection and reduction: a detector broadcasts the R event of the
//! superposition reaching it, one member cell is drawn uniformly, and that
//! cell gives birth to a real particle.

use std::collections::HashSet;

use rand::Rng;
use rqm_kernel::{Behavior, EventId, Instant, Step};

use crate::particle::{ParticleBehavior, RealParticle};
use crate::world::{BasicState, CellId, CellKind, MeasurementContext, Payload, Rect, World, WorldCx};

/// Instants between the generation of R and the reset of the last member
/// of the measured superposition: R collected (+1), reduction starts (+1),
/// signal (+1), two cooperates (+2).
pub const REDUCE_WINDOW: Instant = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasurementError {
    #[error("cannot choose in an empty superposition")]
    EmptySuperposition,
}

/// Draws one identity uniformly. The only consumer of the world's RNG.
pub fn choose<R: Rng + ?Sized>(ids: &[CellId], rng: &mut R) -> Result<CellId, MeasurementError> {
    if ids.is_empty() {
        return Err(MeasurementError::EmptySuperposition);
    }
    Ok(ids[rng.random_range(0..ids.len())])
}

#[derive(Debug, Clone)]
pub struct Detector {
    pub id: usize,
    pub zone: Rect,
    pub accepted: CellKind,
    /// R generations performed (contacts recorded, in passive mode).
    pub detections: u64,
    seen: HashSet<EventId>,
}

impl Detector {
    pub fn new(id: usize, zone: Rect, accepted: CellKind) -> Self {
        Self {
            id,
            zone,
            accepted,
            detections: 0,
            seen: HashSet::new(),
        }
    }
}

/// A real particle created by a reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Birth {
    pub instant: Instant,
    /// Signal event of the superposition the particle comes from.
    pub signal: EventId,
    pub kind: CellKind,
    pub state: BasicState,
    pub x: u32,
    pub y: u32,
}

/// One contact between a detector and a superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub instant: Instant,
    pub detector: usize,
    pub r: EventId,
    pub signal: EventId,
    /// Whether R was generated (false for passive detectors).
    pub measured: bool,
    /// Number of displayed cells of the superposition at contact.
    pub size: u32,
    /// Member states at contact, indexed by basic state.
    pub counts: Vec<u32>,
    pub births: Vec<Birth>,
    /// Instant the last living member (twins included) was reset.
    pub collapsed_at: Option<Instant>,
    /// A member transmitted after the instant of R.
    pub transmitted_after: bool,
}

impl DetectionRecord {
    /// The particle born from the detected superposition itself.
    pub fn chosen(&self) -> Option<&Birth> {
        self.births.iter().find(|b| b.signal == self.signal)
    }
}

/// Scans the zone every instant. A displayed cell of the accepted kind
/// makes the detector generate the R event of its context, once per
/// context.
///
/// Detectors must be spawned after every cell: dispatch follows spawn order
/// at instant boundaries, so the scan then sees the displays of the instant.
pub struct DetectorBehavior {
    index: usize,
}

impl DetectorBehavior {
    pub fn new(index: usize) -> Self {
        Self { index }
    }
}

impl Behavior<World, Payload> for DetectorBehavior {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        let now = cx.now();
        let world = &mut *cx.world;
        let detector = &world.detectors[self.index];
        let mut fresh: Vec<MeasurementContext> = Vec::new();
        for (x, y) in detector.zone.cells() {
            let cell = world.grid.cell(x, y);
            if cell.shown_at != Some(now) || cell.kind != detector.accepted {
                continue;
            }
            if let Some(ctx) = cell.ctx {
                if !detector.seen.contains(&ctx.r) && !fresh.iter().any(|c| c.r == ctx.r) {
                    fresh.push(ctx);
                }
            }
        }
        let measure = world.measure;
        for ctx in &fresh {
            let record = contact(world, self.index, *ctx, now);
            let detector = &mut world.detectors[self.index];
            detector.seen.insert(ctx.r);
            detector.detections += 1;
            world.push_detection(record);
        }
        if measure {
            for ctx in fresh {
                cx.generate(ctx.r, Payload::Unit);
            }
        }
        Step::Cooperate
    }
}

fn contact(world: &World, detector: usize, ctx: MeasurementContext, now: Instant) -> DetectionRecord {
    let mut counts = vec![0u32; world.base as usize];
    for cell in world.grid.cells() {
        if cell.shown_at == Some(now) && cell.ctx.is_some_and(|c| c.signal == ctx.signal) {
            counts[cell.basic_state.value() as usize] += 1;
        }
    }
    DetectionRecord {
        instant: now,
        detector,
        r: ctx.r,
        signal: ctx.signal,
        measured: world.measure,
        size: counts.iter().sum(),
        counts,
        births: Vec::new(),
        collapsed_at: None,
        transmitted_after: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChooserPhase {
    Start,
    Signalled,
    Decide,
}

/// Collects the identities signalled by the members of a superposition and,
/// if nobody chose yet, draws one.
pub struct ChooseInSuperposition {
    ctx: MeasurementContext,
    phase: ChooserPhase,
}

impl ChooseInSuperposition {
    pub fn new(ctx: MeasurementContext) -> Self {
        Self {
            ctx,
            phase: ChooserPhase::Start,
        }
    }
}

impl Behavior<World, Payload> for ChooseInSuperposition {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        match self.phase {
            ChooserPhase::Start => {
                self.phase = ChooserPhase::Signalled;
                Step::Await(self.ctx.signal)
            }
            ChooserPhase::Signalled => {
                self.phase = ChooserPhase::Decide;
                Step::Collect(self.ctx.signal)
            }
            ChooserPhase::Decide => {
                let ids: Vec<CellId> = cx
                    .take_collected()
                    .into_iter()
                    .filter_map(|p| match p {
                        Payload::Identity(id) => Some(id),
                        _ => None,
                    })
                    .collect();
                let world = &mut *cx.world;
                if world.chosen(self.ctx.chosen).is_none() {
                    if let Ok(id) = choose(&ids, &mut world.rng) {
                        world.set_chosen(self.ctx.chosen, id);
                    }
                }
                Step::Terminate
            }
        }
    }
}

/// Writes the cell state into the shared holder unless a twin did first.
pub fn set_chosen_state(world: &mut World, id: CellId, ctx: &MeasurementContext) {
    if world.chosen_state(ctx.chosen_state).is_none() {
        let state = world.grid.by_id(id).basic_state;
        world.set_chosen_state_slot(ctx.chosen_state, state);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReducePhase {
    Start,
    Signal,
    Wait,
    Decide,
}

/// The reduction run by every member of a measured superposition: launch a
/// chooser, signal the own identity one instant later, wait two instants,
/// and if chosen fix the shared state and launch a real particle. Always
/// ends by generating `done`.
pub struct Reduce {
    cell: CellId,
    ctx: MeasurementContext,
    done: EventId,
    phase: ReducePhase,
}

impl Reduce {
    pub fn new(cell: CellId, ctx: MeasurementContext, done: EventId) -> Self {
        Self {
            cell,
            ctx,
            done,
            phase: ReducePhase::Start,
        }
    }
}

impl Behavior<World, Payload> for Reduce {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        match self.phase {
            ReducePhase::Start => {
                cx.spawn(Box::new(ChooseInSuperposition::new(self.ctx)));
                self.phase = ReducePhase::Signal;
                Step::Cooperate
            }
            ReducePhase::Signal => {
                cx.generate(self.ctx.signal, Payload::Identity(self.cell));
                self.phase = ReducePhase::Wait;
                Step::Cooperate
            }
            ReducePhase::Wait => {
                self.phase = ReducePhase::Decide;
                Step::Cooperate
            }
            ReducePhase::Decide => {
                let now = cx.now();
                if cx.world.chosen(self.ctx.chosen) == Some(self.cell) {
                    set_chosen_state(cx.world, self.cell, &self.ctx);
                    launch_particle(cx, self.cell, &self.ctx, now);
                }
                cx.world.reducing -= 1;
                cx.generate(self.done, Payload::Unit);
                Step::Terminate
            }
        }
    }
}

fn launch_particle(cx: &mut WorldCx<'_>, id: CellId, ctx: &MeasurementContext, now: Instant) {
    let world = &mut *cx.world;
    let cell = world.grid.by_id(id);
    let (x, y, kind) = (cell.x, cell.y, cell.kind);
    let Some(state) = world.chosen_state(ctx.chosen_state) else {
        return;
    };
    let particle = RealParticle::launch(x as f64, y as f64, kind, world.particle_vx, state);
    world.particles.push(particle);
    let index = world.particles.len() - 1;
    if let Some(record) = world.detection_for_mut(ctx.r) {
        record.births.push(Birth {
            instant: now,
            signal: ctx.signal,
            kind,
            state,
            x,
            y,
        });
    }
    cx.spawn(Box::new(ParticleBehavior::new(index)));
}
