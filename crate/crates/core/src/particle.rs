//! Real particles: a position and a velocity moved by inertia and bounced
//! off BRICK cells.

use rqm_kernel::{Behavior, Step};

use crate::world::{BasicState, CellKind, Grid, Payload, World, WorldCx};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealParticle {
    pub fx: f64,
    pub fy: f64,
    pub vx: f64,
    pub vy: f64,
    pub state: BasicState,
    pub alive: bool,
}

impl RealParticle {
    pub fn new(fx: f64, fy: f64, vx: f64, vy: f64, state: BasicState) -> Self {
        Self {
            fx,
            fy,
            vx,
            vy,
            state,
            alive: true,
        }
    }

    /// Unit speed along `direction`, `transverse` across it.
    pub fn launch(fx: f64, fy: f64, direction: CellKind, transverse: f64, state: BasicState) -> Self {
        Self::new(fx, fy, transverse, direction.dy() as f64, state)
    }

    /// The cell the particle is drawn in.
    pub fn cell(&self) -> (i64, i64) {
        (self.fx.round() as i64, self.fy.round() as i64)
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

pub fn inertia_step(p: &mut RealParticle) {
    p.fx += p.vx;
    p.fy += p.vy;
}

fn brick_at(grid: &Grid, fx: f64, fy: f64) -> bool {
    grid.is_brick_at(fx.round() as i64, fy.round() as i64)
}

/// Undoes a move into a BRICK cell: flips the velocity components that
/// caused the hit (both on a corner) and moves from the previous position
/// with the reflected velocity, or stays put if that is blocked too.
pub fn bounce_step(p: &mut RealParticle, grid: &Grid) {
    if !brick_at(grid, p.fx, p.fy) {
        return;
    }
    let (px, py) = (p.fx - p.vx, p.fy - p.vy);
    let blocked_x = p.vx != 0.0 && brick_at(grid, px + p.vx, py);
    let blocked_y = p.vy != 0.0 && brick_at(grid, px, py + p.vy);
    if blocked_x || !blocked_y {
        p.vx = -p.vx;
    }
    if blocked_y || !blocked_x {
        p.vy = -p.vy;
    }
    p.fx = px + p.vx;
    p.fy = py + p.vy;
    if brick_at(grid, p.fx, p.fy) {
        p.fx = px;
        p.fy = py;
    }
}

/// Moves one particle of `World::particles` every instant, starting the
/// instant after its launch.
pub struct ParticleBehavior {
    index: usize,
}

impl ParticleBehavior {
    pub fn new(index: usize) -> Self {
        Self { index }
    }
}

impl Behavior<World, Payload> for ParticleBehavior {
    fn step(&mut self, cx: &mut WorldCx<'_>) -> Step {
        let world = &mut *cx.world;
        let p = &mut world.particles[self.index];
        if !p.alive {
            return Step::Terminate;
        }
        inertia_step(p);
        bounce_step(p, &world.grid);
        let (x, y) = p.cell();
        let state = p.state;
        world.paint_particle(x as u32, y as u32, state);
        Step::Cooperate
    }
}
