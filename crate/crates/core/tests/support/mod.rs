#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use rqm_core::scenario::{DetectorSpec, SlitSpec, SourceSpec, WallSpec};
use rqm_core::world::Displayed;
use rqm_core::{CellKind, Rect, ScenarioSpec};

use oracle::Row;

pub fn source(x: u32, y: u32, state: u8) -> SourceSpec {
    SourceSpec {
        x,
        y,
        state,
        direction: CellKind::Up,
        entangled: false,
        period: 1,
        shots: 1,
        start: 0,
    }
}

/// An empty field with one upward source, one shot.
pub fn free_space(width: u32, height: u32, x: u32, y: u32, state: u8) -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(width, height);
    spec.sources.push(source(x, y, state));
    spec
}

/// A horizontal wall across the whole interior at `wall_y` with one-column
/// slits at `slits`.
pub fn slits(width: u32, height: u32, wall_y: u32, slits: &[u32], src: (u32, u32)) -> ScenarioSpec {
    let mut spec = free_space(width, height, src.0, src.1, 0);
    spec.walls.push(WallSpec {
        id: "screen".into(),
        rect: Rect::new(1, wall_y, width - 2, wall_y),
    });
    for &x in slits {
        spec.slits.push(SlitSpec {
            wall: "screen".into(),
            x0: x,
            x1: x,
            open: true,
        });
    }
    spec
}

pub fn detector(zone: Rect) -> DetectorSpec {
    DetectorSpec {
        zone,
        accept: CellKind::Up,
    }
}

/// Displays grouped by instant, then by row, as column -> state.
pub fn displays(log: &[Displayed]) -> BTreeMap<u64, BTreeMap<u32, Row>> {
    let mut out: BTreeMap<u64, BTreeMap<u32, Row>> = BTreeMap::new();
    for d in log {
        let row = out.entry(d.instant).or_default().entry(d.y).or_default();
        assert!(
            row.insert(d.x as i64, d.state.value() as u32).is_none(),
            "cell displayed twice in one instant"
        );
    }
    out
}

/// A reference scenario shipped in `scenarios/`.
pub fn reference(name: &str) -> ScenarioSpec {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    rqm_core::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Every display of a run without detectors' R.
pub fn passive_log(spec: &ScenarioSpec, instants: u64) -> Vec<Displayed> {
    let options = rqm_core::BuildOptions {
        measure: false,
        display_log: true,
        ..rqm_core::BuildOptions::default()
    };
    let mut sim = rqm_core::build_world(spec, options).unwrap();
    sim.run(instants).unwrap();
    sim.world.display_log.take().unwrap()
}

/// `(instant, x, y) -> state` of the displays strictly above row `wall_y`.
pub fn field_above(log: &[Displayed], wall_y: u32) -> BTreeMap<(u64, u32, u32), u8> {
    log.iter()
        .filter(|d| d.y < wall_y)
        .map(|d| ((d.instant, d.x, d.y), d.state.value()))
        .collect()
}

/// The single-shot slit scenario with only the slits in `open` left open and
/// no detectors.
pub fn slit_variant(spec: &ScenarioSpec, open: &[usize]) -> ScenarioSpec {
    let closed: Vec<usize> = (0..spec.slits.len()).filter(|i| !open.contains(i)).collect();
    let mut variant = spec.with_slits_closed(&closed);
    variant.detectors.clear();
    for src in &mut variant.sources {
        src.shots = 1;
    }
    variant
}

/// Displays of one wavefront above row `wall_y` keyed by generation above
/// the row, as `(x - origin, state)`, up to `generations`.
pub fn generations_above(
    field: &BTreeMap<(u64, u32, u32), u8>,
    wall_y: u32,
    t0: u64,
    origin: u32,
    generations: u32,
) -> BTreeMap<u32, Vec<(i64, u8)>> {
    let mut out: BTreeMap<u32, Vec<(i64, u8)>> = BTreeMap::new();
    for (&(t, x, y), &s) in field {
        let g = wall_y - y;
        if g <= generations {
            assert_eq!(t, t0 + 2 * g as u64, "row {y} displayed off-cadence");
            out.entry(g).or_default().push((x as i64 - origin as i64, s));
        }
    }
    for cells in out.values_mut() {
        cells.sort_unstable();
    }
    out
}
