//! Shared fixtures for the kernel benchmarks.

use std::path::Path;

use reachxfer::{Axis, GridSpec, Scenario};

/// The shipped coarse scenario.
pub fn coarse() -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/castalia_coarse.toml");
    Scenario::from_file(&path).expect("shipped config parses")
}

/// The coarse grid box with `counts` points per axis.
pub fn grid_with(s: &Scenario, counts: [usize; 4]) -> GridSpec {
    let axes = s.grid.axes().iter().zip(counts).map(|(a, count)| Axis { count, ..*a }).collect();
    GridSpec::new(axes).expect("valid grid")
}
