//! Grid, cells and the deterministic propagation rule (one behavior per cell).

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rqm_kernel::{Behavior, Cx, EventId, Instant, Step};

use crate::measurement::{DetectionRecord, Detector, Reduce};
use crate::particle::RealParticle;

pub const DEFAULT_BASE: u8 = 6;

/// A basic state: an integer modulo the world base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasicState(u8);

impl BasicState {
    pub fn new(value: u32, base: u8) -> Self {
        Self((value % base as u32) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn add(self, z: u32, base: u8) -> Self {
        Self::new(self.0 as u32 + z % base as u32, base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Up,
    Down,
    Brick,
}

impl CellKind {
    /// Vertical step of a wavefront or particle moving in this direction.
    /// Up is decreasing y.
    pub fn dy(self) -> i64 {
        match self {
            CellKind::Up => -1,
            CellKind::Down => 1,
            CellKind::Brick => 0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            CellKind::Up => CellKind::Down,
            CellKind::Down => CellKind::Up,
            CellKind::Brick => CellKind::Brick,
        }
    }
}

/// Cell identity, `y * width + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Holder of the chosen cell of one superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChosenSlot(u32);

/// Holder of the chosen basic state, shared by entangled superpositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateSlot(u32);

/// Binds the cells of one superposition to one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeasurementContext {
    /// Measurement trigger; shared by entangled twins.
    pub r: EventId,
    /// Carries member identities during a reduction; one per superposition.
    pub signal: EventId,
    pub chosen: ChosenSlot,
    pub chosen_state: StateSlot,
}

/// What a cell hands to the neighbours it triggers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Activation {
    pub kind: CellKind,
    pub state: BasicState,
    pub ctx: MeasurementContext,
}

/// Values carried by the world's events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    Activation(Activation),
    Unit,
    Identity(CellId),
}

pub type WorldCx<'a> = Cx<'a, World, Payload>;
pub type BoxedBehavior = Box<dyn Behavior<World, Payload>>;

/// Inclusive rectangle in cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| (x, y)))
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
    pub kind: CellKind,
    pub living: bool,
    pub basic_state: BasicState,
    pub trigger: EventId,
    /// Signals the end of a reduction this cell is waiting on.
    pub done: EventId,
    pub ctx: Option<MeasurementContext>,
    /// Instant of the last display, cleared on reset.
    pub shown_at: Option<Instant>,
    member_of: Option<EventId>,
}

impl Cell {
    pub fn is_brick(&self) -> bool {
        self.kind == CellKind::Brick
    }

    pub fn is_shown(&self) -> bool {
        self.shown_at.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    width: u32,
    height: u32,
    cells: Vec<Cell>,
}

impl Grid {
    /// Builds a `width` x `height` grid whose border ring is always BRICK.
    /// `brick` marks additional interior BRICK cells; every cell gets a
    /// trigger and a done event from `new_event`.
    pub fn new(
        width: u32,
        height: u32,
        mut brick: impl FnMut(u32, u32) -> bool,
        mut new_event: impl FnMut() -> EventId,
    ) -> Self {
        let mut cells = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                let border = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
                let kind = if border || brick(x, y) {
                    CellKind::Brick
                } else {
                    CellKind::Up
                };
                cells.push(Cell {
                    x,
                    y,
                    kind,
                    living: false,
                    basic_state: BasicState::default(),
                    trigger: new_event(),
                    done: new_event(),
                    ctx: None,
                    shown_at: None,
                    member_of: None,
                });
            }
        }
        Self { width, height, cells }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn linear(&self, x: u32, y: u32) -> CellId {
        linear(x, y, self.width)
    }

    pub fn in_range(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    pub fn cell(&self, x: u32, y: u32) -> &Cell {
        &self.cells[self.linear(x, y).index()]
    }

    pub fn cell_mut(&mut self, x: u32, y: u32) -> &mut Cell {
        let id = self.linear(x, y);
        &mut self.cells[id.index()]
    }

    pub fn get(&self, x: i64, y: i64) -> Option<&Cell> {
        self.in_range(x, y).then(|| self.cell(x as u32, y as u32))
    }

    pub fn by_id(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn by_id_mut(&mut self, id: CellId) -> &mut Cell {
        &mut self.cells[id.index()]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_brick_at(&self, x: i64, y: i64) -> bool {
        self.get(x, y).is_none_or(Cell::is_brick)
    }
}

/// Injective cell identity over a grid of the given width.
pub fn linear(x: u32, y: u32, width: u32) -> CellId {
    CellId(y * width + x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Activation batches that mixed distinct measurement contexts.
    pub collisions: u64,
}

/// One display write, kept for remanent rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Paint {
    pub x: u32,
    pub y: u32,
    pub ink: Ink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ink {
    Cell(BasicState),
    Particle(BasicState),
}

/// A cell display, as seen by tests and tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Displayed {
    pub instant: Instant,
    pub x: u32,
    pub y: u32,
    pub state: BasicState,
    pub ctx: MeasurementContext,
}

/// Everything behaviors share.
pub struct World {
    pub grid: Grid,
    pub base: u8,
    pub rng: ChaCha8Rng,
    pub detectors: Vec<Detector>,
    /// When false, detectors record contacts without generating R.
    pub measure: bool,
    pub particles: Vec<RealParticle>,
    /// Transverse initial velocity of real particles.
    pub particle_vx: f64,
    pub detections: Vec<DetectionRecord>,
    pub diagnostics: Diagnostics,
    /// Source positions, for rendering only.
    pub sources: Vec<(u32, u32)>,
    pub paint_log: Option<Vec<Paint>>,
    pub display_log: Option<Vec<Displayed>>,
    /// Shots not yet fired by the go drivers.
    pub shots_remaining: u64,
    /// Cells currently living.
    pub living: usize,
    /// Reductions in flight.
    pub reducing: usize,
    chosen: Vec<Option<CellId>>,
    chosen_states: Vec<Option<BasicState>>,
    detection_by_r: HashMap<EventId, usize>,
    members: HashMap<EventId, u32>,
}

impl World {
    pub fn new(grid: Grid, base: u8, seed: u64) -> Self {
        Self {
            grid,
            base,
            rng: ChaCha8Rng::seed_from_u64(seed),
            detectors: Vec::new(),
            measure: true,
            particles: Vec::new(),
            particle_vx: 0.0,
            detections: Vec::new(),
            diagnostics: Diagnostics::default(),
            sources: Vec::new(),
            paint_log: None,
            display_log: None,
            shots_remaining: 0,
            living: 0,
            reducing: 0,
            chosen: Vec::new(),
            chosen_states: Vec::new(),
            detection_by_r: HashMap::new(),
            members: HashMap::new(),
        }
    }

    pub fn new_chosen(&mut self) -> ChosenSlot {
        self.chosen.push(None);
        ChosenSlot(self.chosen.len() as u32 - 1)
    }

    pub fn new_chosen_state(&mut self) -> StateSlot {
        self.chosen_states.push(None);
        StateSlot(self.chosen_states.len() as u32 - 1)
    }

    pub fn chosen(&self, slot: ChosenSlot) -> Option<CellId> {
        self.chosen[slot.0 as usize]
    }

    pub fn set_chosen(&mut self, slot: ChosenSlot, id: CellId) {
        self.chosen[slot.0 as usize] = Some(id);
    }

    pub fn chosen_state(&self, slot: StateSlot) -> Option<BasicState> {
        self.chosen_states[slot.0 as usize]
    }

    pub fn set_chosen_state_slot(&mut self, slot: StateSlot, state: BasicState) {
        self.chosen_states[slot.0 as usize] = Some(state);
    }

    /// Living cells whose context carries this R event (both twins of an
    /// entangled pair count).
    pub fn members(&self, r: EventId) -> u32 {
        self.members.get(&r).copied().unwrap_or(0)
    }

    pub fn detection_for(&self, r: EventId) -> Option<&DetectionRecord> {
        self.detection_by_r.get(&r).map(|&i| &self.detections[i])
    }

    pub(crate) fn detection_for_mut(&mut self, r: EventId) -> Option<&mut DetectionRecord> {
        self.detection_by_r.get(&r).map(|&i| &mut self.detections[i])
    }

    pub(crate) fn push_detection(&mut self, record: DetectionRecord) {
        self.detection_by_r.entry(record.r).or_insert(self.detections.len());
        self.detections.push(record);
    }

    fn paint(&mut self, x: u32, y: u32, ink: Ink) {
        if let Some(log) = self.paint_log.as_mut() {
            log.push(Paint { x, y, ink });
        }
    }

    pub(crate) fn paint_particle(&mut self, x: u32, y: u32, state: BasicState) {
        self.paint(x, y, Ink::Particle(state));
    }
}

pub fn add_state(cell: &mut Cell, z: u32, base: u8) {
    cell.basic_state = cell.basic_state.add(z, base);
}

pub fn increm_state(cell: &mut Cell, base: u8) {
    add_state(cell, 1, base);
}

/// Triggers the cell at offset `(ix, iy)` with an activation describing
/// `id`. BRICK and out-of-range targets are left alone.
pub fn awake_neighbour(cx: &mut WorldCx<'_>, id: CellId, ix: i64, iy: i64) {
    let grid = &cx.world.grid;
    let cell = grid.by_id(id);
    let Some(ctx) = cell.ctx else { return };
    let Some(target) = grid.get(cell.x as i64 + ix, cell.y as i64 + iy) else {
        return;
    };
    if target.is_brick() {
        return;
    }
    let activation = Activation {
        kind: cell.kind,
        state: cell.basic_state,
        ctx,
    };
    let trigger = target.trigger;
    cx.generate(trigger, Payload::Activation(activation));
}

/// Triggers the three cells ahead of `id` in its direction.
pub fn awake_neighbourhood(cx: &mut WorldCx<'_>, id: CellId) {
    let cell = cx.world.grid.by_id(id);
    let dy = cell.kind.dy();
    debug_assert_ne!(dy, 0, "BRICK cells never transmit");
    if dy == 0 {
        return;
    }
    if let Some(ctx) = cell.ctx {
        let now = cx.now();
        if let Some(record) = cx.world.detection_for_mut(ctx.r) {
            if record.measured && now > record.instant {
                record.transmitted_after = true;
            }
        }
    }
    for ix in [-1, 0, 1] {
        awake_neighbour(cx, id, ix, dy);
    }
}

pub fn combine(cell: &mut Cell, activation: &Activation, base: u8) {
    cell.kind = activation.kind;
    add_state(cell, activation.state.value() as u32, base);
    cell.ctx = Some(activation.ctx);
}

/// Clears a cell: state 0, dead, erased from the display, no context.
pub fn cell_reset(world: &mut World, id: CellId, now: Instant) {
    let cell = world.grid.by_id_mut(id);
    cell.basic_state = BasicState::default();
    if cell.living {
        world.living -= 1;
    }
    cell.living = false;
    cell.shown_at = None;
    cell.ctx = None;
    if let Some(r) = cell.member_of.take() {
        let left = world.members.get_mut(&r).map(|n| {
            *n -= 1;
            *n
        });
        if left == Some(0) {
            world.members.remove(&r);
            if let Some(record) = world.detection_for_mut(r) {
                if record.measured && record.collapsed_at.is_none() {
                    record.collapsed_at = Some(now);
                }
            }
        }
    }
}

/// Applies a batch of activations collected in one instant, in generation
/// order, then increments and displays the cell.
fn absorb(cx: &mut WorldCx<'_>, id: CellId, batch: Vec<Payload>) {
    let now = cx.now();
    let world = &mut *cx.world;
    let base = world.base;
    let cell = world.grid.by_id_mut(id);
    let mut first_ctx = None;
    let mut mixed = false;
    for payload in &batch {
        if let Payload::Activation(a) = payload {
            combine(cell, a, base);
            match first_ctx {
                None => first_ctx = Some(a.ctx),
                Some(c) => mixed |= c != a.ctx,
            }
        }
    }
    increm_state(cell, base);
    cell.shown_at = Some(now);
    let (x, y, state, ctx) = (cell.x, cell.y, cell.basic_state, cell.ctx);
    let mut joined = None;
    if let Some(ctx) = ctx {
        if cell.member_of.is_none() {
            cell.member_of = Some(ctx.r);
            joined = Some(ctx.r);
        }
    }
    if mixed {
        world.diagnostics.collisions += 1;
    }
    if let Some(r) = joined {
        *world.members.entry(r).or_insert(0) += 1;
    }
    world.paint(x, y, Ink::Cell(state));
    if let (Some(log), Some(ctx)) = (world.display_log.as_mut(), ctx) {
        log.push(Displayed {
            instant: now,
            x,
            y,
            state,
            ctx,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellPhase {
    Start,
    Triggered,
    Combine,
    Measure,
    Reducing,
}

/// The cell rule, looping forever:
///
/// 1. a living cell triggers its neighbourhood, a dead one awaits its
///    trigger and becomes living;
/// 2. the activations of the instant are collected and combined, the state
///    is incremented and displayed;
/// 3. the R values of the next instant are collected: if any, a reduction
///    is launched and awaited, otherwise the neighbourhood is triggered;
/// 4. the cell is reset.
pub struct CellBehavior {
    id: CellId,
    phase: CellPhase,
}

impl CellBehavior {
    pub fn new(id: CellId) -> Self {
        Self {
            id,
            phase: CellPhase::Start,
        }
    }
}

impl Behavior<World, Payload> for CellBehavior {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        loop {
            let cell = cx.world.grid.by_id(self.id);
            let (living, trigger, done, ctx) = (cell.living, cell.trigger, cell.done, cell.ctx);
            match self.phase {
                CellPhase::Start => {
                    if living {
                        awake_neighbourhood(cx, self.id);
                        self.phase = CellPhase::Combine;
                        return Step::Collect(trigger);
                    }
                    self.phase = CellPhase::Triggered;
                    return Step::Await(trigger);
                }
                CellPhase::Triggered => {
                    cx.world.grid.by_id_mut(self.id).living = true;
                    cx.world.living += 1;
                    self.phase = CellPhase::Combine;
                    return Step::Collect(trigger);
                }
                CellPhase::Combine => {
                    let batch = cx.take_collected();
                    absorb(cx, self.id, batch);
                    match cx.world.grid.by_id(self.id).ctx {
                        Some(ctx) => {
                            self.phase = CellPhase::Measure;
                            return Step::Collect(ctx.r);
                        }
                        None => {
                            cell_reset(cx.world, self.id, cx.now());
                            self.phase = CellPhase::Start;
                        }
                    }
                }
                CellPhase::Measure => {
                    if cx.take_collected().is_empty() {
                        awake_neighbourhood(cx, self.id);
                        cell_reset(cx.world, self.id, cx.now());
                        self.phase = CellPhase::Start;
                        continue;
                    }
                    let Some(ctx) = ctx else {
                        cell_reset(cx.world, self.id, cx.now());
                        self.phase = CellPhase::Start;
                        continue;
                    };
                    cx.world.reducing += 1;
                    cx.spawn(Box::new(Reduce::new(self.id, ctx, done)));
                    self.phase = CellPhase::Reducing;
                    return Step::Await(done);
                }
                CellPhase::Reducing => {
                    cell_reset(cx.world, self.id, cx.now());
                    self.phase = CellPhase::Start;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events() -> rqm_kernel::Scheduler<(), Payload> {
        rqm_kernel::Scheduler::default()
    }

    fn lone_cell(state: u32) -> Cell {
        let mut s = events();
        let grid = Grid::new(3, 3, |_, _| false, || s.new_event());
        let mut cell = grid.cell(1, 1).clone();
        cell.basic_state = BasicState::new(state, DEFAULT_BASE);
        cell
    }

    #[test]
    fn add_state_wraps() {
        let mut c = lone_cell(4);
        add_state(&mut c, 5, 6);
        assert_eq!(c.basic_state.value(), 3);
        let mut c = lone_cell(0);
        add_state(&mut c, 0, 6);
        assert_eq!(c.basic_state.value(), 0);
        let mut c = lone_cell(5);
        add_state(&mut c, 1, 6);
        assert_eq!(c.basic_state.value(), 0);
    }

    #[test]
    fn increm_has_order_base() {
        let mut c = lone_cell(0);
        increm_state(&mut c, 6);
        assert_eq!(c.basic_state.value(), 1);
        let mut c = lone_cell(5);
        increm_state(&mut c, 6);
        assert_eq!(c.basic_state.value(), 0);
        let mut c = lone_cell(3);
        for _ in 0..6 {
            increm_state(&mut c, 6);
        }
        assert_eq!(c.basic_state.value(), 3);
    }

    #[test]
    fn linear_is_row_major() {
        assert_eq!(linear(0, 0, 10), CellId(0));
        assert_eq!(linear(3, 2, 10), CellId(23));
        let mut seen = std::collections::HashSet::new();
        for y in 0..7 {
            for x in 0..10 {
                assert!(seen.insert(linear(x, y, 10)));
            }
        }
    }

    #[test]
    fn border_is_brick() {
        let mut s = events();
        let grid = Grid::new(5, 4, |x, y| (x, y) == (2, 2), || s.new_event());
        let bricks: Vec<(u32, u32)> = grid
            .cells()
            .iter()
            .filter(|c| c.is_brick())
            .map(|c| (c.x, c.y))
            .collect();
        assert_eq!(bricks.len(), 5 * 4 - 3 * 2 + 1);
        assert!(grid.cell(2, 2).is_brick());
        assert!(!grid.cell(1, 1).is_brick());
        assert!(grid.is_brick_at(-1, 0));
        assert!(grid.is_brick_at(5, 1));
    }

    #[test]
    fn basic_state_reduces_modulo_base() {
        assert_eq!(BasicState::new(13, 6).value(), 1);
        assert_eq!(BasicState::new(4, 6).add(u32::MAX, 6).value(), 1);
    }
}
