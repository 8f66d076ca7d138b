//! Scenario description and world construction.
//!
//! A scenario fixes the grid, its walls and slits, the sources and their
//! firing schedules, the detectors, and the run parameters. See [`text`]
//! for the file format.

mod sources;
pub mod text;

use std::fmt;

use rqm_kernel::{KernelConfig, Scheduler};

pub use sources::{fire, DualSourceBehavior, ScheduleGo, SourceBehavior, SourceRecord};
pub use text::{parse, to_text};

use crate::measurement::{Detector, DetectorBehavior};
use crate::sim::Simulation;
use crate::world::{BasicState, CellBehavior, CellKind, Grid, Rect, World, DEFAULT_BASE};

#[derive(Debug, Clone, PartialEq)]
pub struct WallSpec {
    pub id: String,
    pub rect: Rect,
}

/// A gap in a wall over the columns `x0..=x1`. A closed slit stays BRICK.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitSpec {
    pub wall: String,
    pub x0: u32,
    pub x1: u32,
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub x: u32,
    pub y: u32,
    pub state: u8,
    pub direction: CellKind,
    pub entangled: bool,
    pub period: u64,
    pub shots: u64,
    /// Instant of the first shot.
    pub start: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub zone: Rect,
    pub accept: CellKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub base: u8,
    pub walls: Vec<WallSpec>,
    pub slits: Vec<SlitSpec>,
    pub sources: Vec<SourceSpec>,
    pub detectors: Vec<DetectorSpec>,
    pub run_length: u64,
    pub seed: u64,
    /// Transverse initial velocity of real particles, in `[-1, 1]`.
    pub particle_vx: f64,
}

impl ScenarioSpec {
    /// An empty `width` x `height` world.
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            name: String::from("scenario"),
            width,
            height,
            base: DEFAULT_BASE,
            walls: Vec::new(),
            slits: Vec::new(),
            sources: Vec::new(),
            detectors: Vec::new(),
            run_length: 1000,
            seed: 0,
            particle_vx: 0.0,
        }
    }

    /// Whether `(x, y)` is BRICK once walls and slits are applied.
    pub fn is_brick(&self, x: u32, y: u32) -> bool {
        if x == 0 || y == 0 || x + 1 >= self.width || y + 1 >= self.height {
            return true;
        }
        self.walls.iter().any(|wall| {
            wall.rect.contains(x, y)
                && !self
                    .slits
                    .iter()
                    .any(|s| s.open && s.wall == wall.id && (s.x0..=s.x1).contains(&x))
        })
    }

    /// Non-BRICK cells, each of which runs one cell behavior.
    pub fn interior_cells(&self) -> usize {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|&(x, y)| !self.is_brick(x, y))
            .count()
    }

    /// The same scenario with the given slits of every wall closed.
    pub fn with_slits_closed(&self, closed: &[usize]) -> Self {
        let mut spec = self.clone();
        for &i in closed {
            if let Some(slit) = spec.slits.get_mut(i) {
                slit.open = false;
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<(), Invalid> {
        let fail = |item: Item, message: String| Err(Invalid { item, message });
        if self.width < 3 || self.height < 3 {
            return fail(
                Item::Grid,
                format!("grid {}x{} is smaller than 3x3", self.width, self.height),
            );
        }
        if self.base < 2 {
            return fail(Item::Grid, format!("base {} is smaller than 2", self.base));
        }
        if !(-1.0..=1.0).contains(&self.particle_vx) {
            return fail(Item::Run, format!("particle_vx {} outside [-1, 1]", self.particle_vx));
        }
        let in_grid = |r: &Rect| r.x0 <= r.x1 && r.y0 <= r.y1 && r.x1 < self.width && r.y1 < self.height;
        for (i, wall) in self.walls.iter().enumerate() {
            if !in_grid(&wall.rect) {
                return fail(
                    Item::Wall(i),
                    format!("wall '{}' {} is outside the grid", wall.id, RectDisplay(wall.rect)),
                );
            }
            if self.walls[..i].iter().any(|w| w.id == wall.id) {
                return fail(Item::Wall(i), format!("duplicate wall id '{}'", wall.id));
            }
        }
        for (i, slit) in self.slits.iter().enumerate() {
            let Some(wall) = self.walls.iter().find(|w| w.id == slit.wall) else {
                return fail(Item::Slit(i), format!("slit refers to unknown wall '{}'", slit.wall));
            };
            if slit.x0 > slit.x1 || slit.x0 < wall.rect.x0 || slit.x1 > wall.rect.x1 {
                return fail(
                    Item::Slit(i),
                    format!(
                        "slit columns {}..={} not within wall '{}' columns {}..={}",
                        slit.x0, slit.x1, wall.id, wall.rect.x0, wall.rect.x1
                    ),
                );
            }
        }
        for (i, src) in self.sources.iter().enumerate() {
            if src.x >= self.width || src.y >= self.height || self.is_brick(src.x, src.y) {
                return fail(
                    Item::Source(i),
                    format!("source at ({}, {}) is not on an interior cell", src.x, src.y),
                );
            }
            if src.direction == CellKind::Brick {
                return fail(Item::Source(i), "source direction must be up or down".into());
            }
            if src.state >= self.base {
                return fail(
                    Item::Source(i),
                    format!("state {} is not below base {}", src.state, self.base),
                );
            }
            if src.period == 0 {
                return fail(Item::Source(i), "period must be at least 1".into());
            }
            let mut directions = vec![src.direction];
            if src.entangled {
                directions.push(src.direction.opposite());
            }
            for dir in directions {
                let ty = src.y as i64 + dir.dy();
                if ty < 0 || ty >= self.height as i64 || self.is_brick(src.x, ty as u32) {
                    return fail(
                        Item::Source(i),
                        format!(
                            "source at ({}, {}) would fire the BRICK cell ({}, {ty})",
                            src.x, src.y, src.x
                        ),
                    );
                }
            }
        }
        for (i, det) in self.detectors.iter().enumerate() {
            if !in_grid(&det.zone) {
                return fail(
                    Item::Detector(i),
                    format!("detector zone {} is outside the grid", RectDisplay(det.zone)),
                );
            }
            if det.accept == CellKind::Brick {
                return fail(Item::Detector(i), "detector must accept up or down".into());
            }
            if let Some((x, y)) = det.zone.cells().find(|&(x, y)| self.is_brick(x, y)) {
                return fail(
                    Item::Detector(i),
                    format!(
                        "detector zone {} covers the BRICK cell ({x}, {y})",
                        RectDisplay(det.zone)
                    ),
                );
            }
        }
        Ok(())
    }
}

struct RectDisplay(Rect);

impl fmt::Display for RectDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        write!(f, "({}, {})-({}, {})", r.x0, r.y0, r.x1, r.y1)
    }
}

/// The element of a scenario a validation error is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Item {
    Grid,
    Run,
    Wall(usize),
    Slit(usize),
    Source(usize),
    Detector(usize),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Grid => write!(f, "[grid]"),
            Item::Run => write!(f, "[run]"),
            Item::Wall(i) => write!(f, "[wall] #{i}"),
            Item::Slit(i) => write!(f, "[slit] #{i}"),
            Item::Source(i) => write!(f, "[source] #{i}"),
            Item::Detector(i) => write!(f, "[detector] #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{item}: {message}")]
pub struct Invalid {
    pub item: Item,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}{invalid}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { line: Option<usize>, invalid: Invalid },
}

impl From<Invalid> for ScenarioError {
    fn from(invalid: Invalid) -> Self {
        ScenarioError::Invalid { line: None, invalid }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub kernel: KernelConfig,
    /// Detectors generate R. When false they only record contacts.
    pub measure: bool,
    /// Keep every cell display in `World::display_log`.
    pub display_log: bool,
    /// Keep display writes in `World::paint_log` for remanent frames.
    pub paint_log: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            measure: true,
            display_log: false,
            paint_log: false,
        }
    }
}

/// Builds the grid and spawns, in this order: one behavior per non-BRICK
/// cell (row-major), the detectors, the sources, and one go driver per
/// source with shots to fire.
pub fn build_world(spec: &ScenarioSpec, options: BuildOptions) -> Result<Simulation, ScenarioError> {
    spec.validate()?;
    let mut scheduler = Scheduler::new(options.kernel);
    let grid = Grid::new(
        spec.width,
        spec.height,
        |x, y| spec.is_brick(x, y),
        || scheduler.new_event(),
    );
    let mut world = World::new(grid, spec.base, spec.seed);
    world.measure = options.measure;
    world.particle_vx = spec.particle_vx;
    world.display_log = options.display_log.then(Vec::new);
    world.paint_log = options.paint_log.then(Vec::new);

    let ids: Vec<_> = world
        .grid
        .cells()
        .iter()
        .filter(|c| !c.is_brick())
        .map(|c| world.grid.linear(c.x, c.y))
        .collect();
    for id in ids {
        scheduler.spawn(Box::new(CellBehavior::new(id)));
    }
    for (i, det) in spec.detectors.iter().enumerate() {
        world.detectors.push(Detector::new(i, det.zone, det.accept));
        scheduler.spawn(Box::new(DetectorBehavior::new(i)));
    }
    let mut records = Vec::new();
    for src in &spec.sources {
        let record = SourceRecord {
            x: src.x,
            y: src.y,
            direction: src.direction,
            state: BasicState::new(src.state as u32, spec.base),
            entangled: src.entangled,
            go: scheduler.new_event(),
        };
        world.sources.push((src.x, src.y));
        if src.entangled {
            scheduler.spawn(Box::new(DualSourceBehavior::new(record)));
        } else {
            scheduler.spawn(Box::new(SourceBehavior::new(record)));
        }
        records.push(record);
    }
    for (src, record) in spec.sources.iter().zip(&records) {
        if src.shots > 0 {
            world.shots_remaining += src.shots;
            scheduler.spawn(Box::new(ScheduleGo::new(
                vec![record.go],
                src.period,
                src.shots,
                src.start,
            )));
        }
    }
    Ok(Simulation::new(scheduler, world, records))
}
