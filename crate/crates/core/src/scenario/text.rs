//! Scenario files.
//!
//! A scenario is a sequence of sections, each opened by a `[name]` header and
//! followed by `key = value` lines. `#` starts a comment. `[grid]` and `[run]`
//! appear at most once; `[wall]`, `[slit]`, `[source]` and `[detector]` may
//! repeat. Rectangles are written `x0 y0 x1 y1`, inclusive.
//!
//! ```text
//! [grid]
//! name = two-slit
//! width = 41
//! height = 40
//!
//! [wall]
//! id = screen
//! rect = 1 20 39 20
//!
//! [slit]
//! wall = screen
//! x0 = 18
//! x1 = 18
//!
//! [source]
//! x = 20
//! y = 37
//! state = 0
//! direction = up
//! period = 10
//! shots = 100
//!
//! [detector]
//! zone = 15 5 25 5
//! accept = up
//!
//! [run]
//! instants = 1200
//! seed = 7
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{DetectorSpec, Item, ScenarioError, ScenarioSpec, SlitSpec, SourceSpec, WallSpec};
use crate::world::{CellKind, Rect, DEFAULT_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Grid,
    Wall,
    Slit,
    Source,
    Detector,
    Run,
}

impl Section {
    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Grid => &["name", "width", "height", "base"],
            Section::Wall => &["id", "rect"],
            Section::Slit => &["wall", "x0", "x1", "open"],
            Section::Source => &["x", "y", "state", "direction", "entangled", "period", "shots", "start"],
            Section::Detector => &["zone", "accept"],
            Section::Run => &["instants", "seed", "particle_vx"],
        }
    }
}

/// Key-value pairs of one section with the line of each key.
struct Block {
    section: Section,
    line: usize,
    entries: HashMap<&'static str, (usize, String)>,
}

impl Block {
    fn raw(&self, key: &'static str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ScenarioError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, text)) => text.parse().map(Some).map_err(|_| ScenarioError::Parse {
                line: *line,
                message: format!("invalid value '{text}' for '{key}'"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T, ScenarioError> {
        self.get(key)?.ok_or_else(|| ScenarioError::Parse {
            line: self.line,
            message: format!("missing key '{key}'"),
        })
    }

    fn kind(&self, key: &'static str) -> Result<Option<CellKind>, ScenarioError> {
        let Some((line, text)) = self.raw(key) else {
            return Ok(None);
        };
        match text.as_str() {
            "up" => Ok(Some(CellKind::Up)),
            "down" => Ok(Some(CellKind::Down)),
            _ => Err(ScenarioError::Parse {
                line: *line,
                message: format!("'{key}' must be 'up' or 'down', got '{text}'"),
            }),
        }
    }

    fn rect(&self, key: &'static str) -> Result<Rect, ScenarioError> {
        let Some((line, text)) = self.raw(key) else {
            return Err(ScenarioError::Parse {
                line: self.line,
                message: format!("missing key '{key}'"),
            });
        };
        let parts: Result<Vec<u32>, _> = text.split_whitespace().map(str::parse).collect();
        match parts.as_deref() {
            Ok(&[x0, y0, x1, y1]) => Ok(Rect::new(x0, y0, x1, y1)),
            _ => Err(ScenarioError::Parse {
                line: *line,
                message: format!("'{key}' must be four integers 'x0 y0 x1 y1', got '{text}'"),
            }),
        }
    }
}

fn split_blocks(text: &str) -> Result<Vec<Block>, ScenarioError> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let section = match name.trim() {
                "grid" => Section::Grid,
                "wall" => Section::Wall,
                "slit" => Section::Slit,
                "source" => Section::Source,
                "detector" => Section::Detector,
                "run" => Section::Run,
                other => {
                    return Err(ScenarioError::Parse {
                        line,
                        message: format!("unknown section '[{other}]'"),
                    })
                }
            };
            if matches!(section, Section::Grid | Section::Run) && blocks.iter().any(|b| b.section == section) {
                return Err(ScenarioError::Parse {
                    line,
                    message: format!("duplicate section '[{}]'", name.trim()),
                });
            }
            blocks.push(Block {
                section,
                line,
                entries: HashMap::new(),
            });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            });
        };
        let Some(block) = blocks.last_mut() else {
            return Err(ScenarioError::Parse {
                line,
                message: "key outside of any section".into(),
            });
        };
        let key = key.trim();
        let Some(&known) = block.section.keys().iter().find(|k| **k == key) else {
            return Err(ScenarioError::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        };
        if block.entries.insert(known, (line, value.trim().to_owned())).is_some() {
            return Err(ScenarioError::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(blocks)
}

/// Parses and validates a scenario. Validation errors carry the line of the
/// offending section.
pub fn parse(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let blocks = split_blocks(text)?;
    let Some(grid) = blocks.iter().find(|b| b.section == Section::Grid) else {
        return Err(ScenarioError::Parse {
            line: 1,
            message: "missing section '[grid]'".into(),
        });
    };
    let mut spec = ScenarioSpec::new(grid.require("width")?, grid.require("height")?);
    if let Some((_, name)) = grid.raw("name") {
        spec.name = name.clone();
    }
    spec.base = grid.get("base")?.unwrap_or(DEFAULT_BASE);

    let mut lines: HashMap<Item, usize> = HashMap::new();
    lines.insert(Item::Grid, grid.line);
    for block in &blocks {
        match block.section {
            Section::Grid => {}
            Section::Run => {
                lines.insert(Item::Run, block.line);
                if let Some(n) = block.get("instants")? {
                    spec.run_length = n;
                }
                if let Some(seed) = block.get("seed")? {
                    spec.seed = seed;
                }
                if let Some(vx) = block.get("particle_vx")? {
                    spec.particle_vx = vx;
                }
            }
            Section::Wall => {
                lines.insert(Item::Wall(spec.walls.len()), block.line);
                spec.walls.push(WallSpec {
                    id: block.require("id")?,
                    rect: block.rect("rect")?,
                });
            }
            Section::Slit => {
                lines.insert(Item::Slit(spec.slits.len()), block.line);
                spec.slits.push(SlitSpec {
                    wall: block.require("wall")?,
                    x0: block.require("x0")?,
                    x1: block.require("x1")?,
                    open: block.get("open")?.unwrap_or(true),
                });
            }
            Section::Source => {
                lines.insert(Item::Source(spec.sources.len()), block.line);
                spec.sources.push(SourceSpec {
                    x: block.require("x")?,
                    y: block.require("y")?,
                    state: block.require("state")?,
                    direction: block.kind("direction")?.ok_or_else(|| ScenarioError::Parse {
                        line: block.line,
                        message: "missing key 'direction'".into(),
                    })?,
                    entangled: block.get("entangled")?.unwrap_or(false),
                    period: block.get("period")?.unwrap_or(1),
                    shots: block.get("shots")?.unwrap_or(1),
                    start: block.get("start")?.unwrap_or(0),
                });
            }
            Section::Detector => {
                lines.insert(Item::Detector(spec.detectors.len()), block.line);
                spec.detectors.push(DetectorSpec {
                    zone: block.rect("zone")?,
                    accept: block.kind("accept")?.unwrap_or(CellKind::Up),
                });
            }
        }
    }
    spec.validate().map_err(|invalid| ScenarioError::Invalid {
        line: lines.get(&invalid.item).copied(),
        invalid,
    })?;
    Ok(spec)
}

fn kind_name(kind: CellKind) -> &'static str {
    match kind {
        CellKind::Up => "up",
        CellKind::Down => "down",
        CellKind::Brick => "brick",
    }
}

fn rect_text(r: Rect) -> String {
    format!("{} {} {} {}", r.x0, r.y0, r.x1, r.y1)
}

/// Writes a scenario in the form [`parse`] reads. Names and ids must not
/// contain `#` or line breaks.
pub fn to_text(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[grid]");
    let _ = writeln!(out, "name = {}", spec.name);
    let _ = writeln!(out, "width = {}", spec.width);
    let _ = writeln!(out, "height = {}", spec.height);
    let _ = writeln!(out, "base = {}", spec.base);
    for wall in &spec.walls {
        let _ = writeln!(out, "\n[wall]\nid = {}\nrect = {}", wall.id, rect_text(wall.rect));
    }
    for slit in &spec.slits {
        let _ = writeln!(
            out,
            "\n[slit]\nwall = {}\nx0 = {}\nx1 = {}\nopen = {}",
            slit.wall, slit.x0, slit.x1, slit.open
        );
    }
    for s in &spec.sources {
        let _ = writeln!(
            out,
            "\n[source]\nx = {}\ny = {}\nstate = {}\ndirection = {}\nentangled = {}\nperiod = {}\nshots = {}\nstart = {}",
            s.x,
            s.y,
            s.state,
            kind_name(s.direction),
            s.entangled,
            s.period,
            s.shots,
            s.start
        );
    }
    for d in &spec.detectors {
        let _ = writeln!(
            out,
            "\n[detector]\nzone = {}\naccept = {}",
            rect_text(d.zone),
            kind_name(d.accept)
        );
    }
    let _ = writeln!(
        out,
        "\n[run]\ninstants = {}\nseed = {}\nparticle_vx = {}",
        spec.run_length, spec.seed, spec.particle_vx
    );
    out
}
