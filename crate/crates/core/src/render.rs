//! Frames: binary PPM images and ASCII dumps of the world.
//!
//! Layers, top first: real particles, displayed cells, BRICK, sources,
//! detector zones, background. With remanence every display ever made stays
//! painted under the live layers.

use std::io::{self, Write};

use crate::world::{BasicState, Ink, World};

pub type Rgb = [u8; 3];

/// Colours of basic states 0 to 5; larger bases cycle through them.
pub const PALETTE: [Rgb; 6] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [240, 50, 230],
];
pub const DETECTOR: Rgb = [255, 140, 0];
pub const SOURCE: Rgb = [128, 0, 0];
pub const BRICK: Rgb = [0, 0, 0];
pub const BACKGROUND: Rgb = [255, 255, 255];

pub fn state_colour(state: BasicState) -> Rgb {
    PALETTE[state.value() as usize % PALETTE.len()]
}

/// One pixel block per cell, `scale` pixels wide.
pub struct FrameBuffer {
    width: u32,
    height: u32,
    scale: u32,
    remanence: bool,
    trail: Vec<Option<Rgb>>,
    pixels: Vec<Rgb>,
}

impl FrameBuffer {
    pub fn new(width: u32, height: u32, scale: u32, remanence: bool) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            scale: scale.max(1),
            remanence,
            trail: vec![None; n],
            pixels: vec![BACKGROUND; n],
        }
    }

    pub fn for_world(world: &World, scale: u32, remanence: bool) -> Self {
        Self::new(world.grid.width(), world.grid.height(), scale, remanence)
    }

    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Redraws from the world. In remanent mode the world's paint log is
    /// drained into the trail first.
    pub fn render(&mut self, world: &mut World) {
        if self.remanence {
            if let Some(log) = world.paint_log.as_mut() {
                for paint in log.drain(..) {
                    let colour = match paint.ink {
                        Ink::Cell(s) | Ink::Particle(s) => state_colour(s),
                    };
                    let i = paint.y as usize * self.width as usize + paint.x as usize;
                    self.trail[i] = Some(colour);
                }
            }
        }
        self.pixels.fill(BACKGROUND);
        for det in &world.detectors {
            for (x, y) in det.zone.cells() {
                let i = self.index(x, y);
                self.pixels[i] = DETECTOR;
            }
        }
        for &(x, y) in &world.sources {
            let i = self.index(x, y);
            self.pixels[i] = SOURCE;
        }
        for cell in world.grid.cells() {
            let i = self.index(cell.x, cell.y);
            if cell.is_brick() {
                self.pixels[i] = BRICK;
            }
            if let Some(colour) = self.trail[i] {
                self.pixels[i] = colour;
            }
            if cell.is_shown() {
                self.pixels[i] = state_colour(cell.basic_state);
            }
        }
        for p in world.particles.iter().filter(|p| p.alive) {
            let (x, y) = p.cell();
            if world.grid.in_range(x, y) {
                let i = self.index(x as u32, y as u32);
                self.pixels[i] = state_colour(p.state);
            }
        }
    }

    /// Writes the frame as a binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        let (w, h) = (self.width * self.scale, self.height * self.scale);
        write!(out, "P6\n{w} {h}\n255\n")?;
        let mut row = Vec::with_capacity(w as usize * 3);
        for y in 0..self.height {
            row.clear();
            for x in 0..self.width {
                let px = self.pixels[self.index(x, y)];
                for _ in 0..self.scale {
                    row.extend_from_slice(&px);
                }
            }
            for _ in 0..self.scale {
                out.write_all(&row)?;
            }
        }
        Ok(())
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_ppm(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[self.index(x, y)]
    }
}

/// One character per cell: `*` particle, state digit, `#` BRICK, `S` source,
/// `D` detector, `.` otherwise.
pub fn ascii(world: &World) -> String {
    let (w, h) = (world.grid.width(), world.grid.height());
    let mut chars = vec![b'.'; w as usize * h as usize];
    let at = |x: u32, y: u32| y as usize * w as usize + x as usize;
    for det in &world.detectors {
        for (x, y) in det.zone.cells() {
            chars[at(x, y)] = b'D';
        }
    }
    for &(x, y) in &world.sources {
        chars[at(x, y)] = b'S';
    }
    for cell in world.grid.cells() {
        if cell.is_brick() {
            chars[at(cell.x, cell.y)] = b'#';
        }
        if cell.is_shown() {
            let v = cell.basic_state.value();
            chars[at(cell.x, cell.y)] = if v < 10 { b'0' + v } else { b'+' };
        }
    }
    for p in world.particles.iter().filter(|p| p.alive) {
        let (x, y) = p.cell();
        if world.grid.in_range(x, y) {
            chars[at(x as u32, y as u32)] = b'*';
        }
    }
    let mut out = String::with_capacity(chars.len() + h as usize);
    for row in chars.chunks(w as usize) {
        out.push_str(std::str::from_utf8(row).expect("ascii"));
        out.push('\n');
    }
    out
}
