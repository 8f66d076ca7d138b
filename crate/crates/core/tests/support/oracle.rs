//! Independent brute-force model of one free-space wavefront.
//!
//! A row is a map from column to state. The next row holds every column
//! within one of a living cell; each new cell sums the states of the living
//! cells below it (dead cells contribute nothing), adds one, and reduces
//! modulo the base.

use std::collections::BTreeMap;

pub type Row = BTreeMap<i64, u32>;

/// The cell hit by a fire of state `fired` holds `fired + 1`.
pub fn first_row(column: i64, fired: u32, base: u32) -> Row {
    Row::from([(column, (fired + 1) % base)])
}

pub fn next_row(row: &Row, base: u32) -> Row {
    let mut next = Row::new();
    for &x in row.keys() {
        for nx in x - 1..=x + 1 {
            next.entry(nx).or_insert_with(|| {
                let sum: u32 = (nx - 1..=nx + 1).filter_map(|k| row.get(&k)).sum();
                (sum + 1) % base
            });
        }
    }
    next
}

pub fn generations(column: i64, fired: u32, base: u32, count: usize) -> Vec<Row> {
    let mut rows = vec![first_row(column, fired, base)];
    while rows.len() < count {
        let next = next_row(rows.last().unwrap(), base);
        rows.push(next);
    }
    rows
}

pub fn states(row: &Row) -> Vec<u32> {
    row.values().copied().collect()
}
