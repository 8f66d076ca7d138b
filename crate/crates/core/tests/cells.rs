mod support;

use proptest::prelude::*;
use rqm_core::{build_world, BuildOptions, ScenarioSpec};

use support::oracle::{self, Row};
use support::{displays, free_space};

fn logged() -> BuildOptions {
    BuildOptions {
        display_log: true,
        ..BuildOptions::default()
    }
}

/// Runs `spec` for `instants` and returns, per instant with displays, the
/// single displayed row.
fn wavefront_rows(spec: &ScenarioSpec, instants: u64) -> Vec<(u64, u32, Row)> {
    let mut sim = build_world(spec, logged()).unwrap();
    sim.run(instants).unwrap();
    let log = sim.world.display_log.take().unwrap();
    displays(&log)
        .into_iter()
        .map(|(t, rows)| {
            assert_eq!(rows.len(), 1, "instant {t} displays several rows");
            let (y, row) = rows.into_iter().next().unwrap();
            (t, y, row)
        })
        .collect()
}

#[test]
fn free_space_matches_row_recurrence() {
    let generations = 60;
    let spec = free_space(131, 66, 65, 64, 0);
    let rows = wavefront_rows(&spec, 2 * generations as u64 + 2);
    let expected = oracle::generations(65, 0, 6, generations);
    assert!(rows.len() >= generations);
    for (g, (instant, y, row)) in rows.iter().take(generations).enumerate() {
        assert_eq!(*instant, 1 + 2 * g as u64, "generation {g}");
        assert_eq!(*y, 63 - g as u32);
        assert_eq!(row, &expected[g], "generation {g}");
    }
}

#[test]
fn pinned_first_generations() {
    let spec = free_space(21, 12, 10, 10, 0);
    let rows = wavefront_rows(&spec, 8);
    let states: Vec<Vec<u32>> = rows.iter().map(|(_, _, r)| oracle::states(r)).collect();
    assert_eq!(states[0], vec![1]);
    assert_eq!(states[1], vec![2, 2, 2]);
    assert_eq!(states[2], vec![3, 5, 1, 5, 3]);
    assert_eq!(states[3], vec![4, 3, 4, 0, 4, 3, 4]);
}

#[test]
fn generation_width_grows_by_two() {
    let spec = free_space(61, 30, 30, 28, 3);
    for (g, (_, _, row)) in wavefront_rows(&spec, 40).iter().enumerate() {
        assert_eq!(row.len(), 2 * g + 1);
        let first = *row.keys().next().unwrap();
        assert_eq!(first, 30 - g as i64);
    }
}

#[test]
fn wavefront_dies_at_the_border() {
    let spec = free_space(11, 8, 5, 6, 0);
    let mut sim = build_world(&spec, logged()).unwrap();
    sim.run(40).unwrap();
    assert!(sim.is_settled());
    assert_eq!(sim.world.living, 0);
    assert!(sim.world.grid.cells().iter().all(|c| !c.living && !c.is_shown()));
    let shown = displays(sim.world.display_log.as_ref().unwrap());
    // rows 5 down to 1, then the border ring stops it
    assert_eq!(shown.len(), 5);
}

#[test]
fn clipped_wavefront_drops_cells_beyond_the_side_walls() {
    let spec = free_space(7, 20, 3, 18, 0);
    let rows = wavefront_rows(&spec, 40);
    let mut row = oracle::first_row(3, 0, 6);
    for (_, _, shown) in rows {
        assert_eq!(shown, row);
        row = oracle::next_row(&row, 6);
        row.retain(|&x, _| (1..=5).contains(&x));
    }
}

#[test]
fn stacked_shots_do_not_interact() {
    let mut spec = free_space(41, 30, 20, 28, 2);
    spec.sources[0].shots = 3;
    spec.sources[0].period = 4;
    let mut sim = build_world(&spec, logged()).unwrap();
    sim.run(70).unwrap();
    assert_eq!(sim.world.diagnostics.collisions, 0);
    let shown = displays(sim.world.display_log.as_ref().unwrap());
    let mut expected = vec![oracle::first_row(20, 2, 6)];
    while expected.len() < 27 {
        let mut next = oracle::next_row(expected.last().unwrap(), 6);
        next.retain(|&x, _| (1..=39).contains(&x));
        expected.push(next);
    }
    for (t, rows) in shown {
        for (y, row) in rows {
            let g = (27 - y) as usize;
            assert_eq!(row, expected[g], "instant {t} row {y}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn any_state_and_base_follow_the_recurrence(fired in 0u8..9, base in 2u8..10, column in 12u32..28) {
        let fired = fired % base;
        let mut spec = free_space(41, 16, column, 14, fired);
        spec.base = base;
        let rows = wavefront_rows(&spec, 30);
        let expected = oracle::generations(column as i64, fired as u32, base as u32, 12);
        for (g, (_, _, row)) in rows.iter().take(11).enumerate() {
            prop_assert_eq!(row, &expected[g]);
        }
    }
}
