#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use reachxfer::hjsolver::check_invariants;
use reachxfer::systems::{solve_planar, terminal_and_obstacle};
use reachxfer::{ConstraintSet, Scenario, TargetSet, Trajectory, ValueField};

pub fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::from_file(&config(name)).unwrap()
}

/// Solves the planar problem of `s` and checks the structural invariants of
/// every stored slice.
pub fn solve_checked(s: &Scenario) -> ValueField {
    let (k, c) = (s.constraints(), s.target_set());
    let field = solve_planar(&s.model(), &s.grid, &k, &c, &s.stamps(), s.solver, |_, _| {}).unwrap();
    let (terminal, obstacle) = terminal_and_obstacle(&s.grid, &k, &c, s.solver.confine);
    check_invariants(&field, &terminal, &obstacle).unwrap();
    field
}

/// Coarse Castalia-like scenario and its field, solved once per test binary.
pub fn coarse() -> &'static (Scenario, ValueField) {
    static CELL: OnceLock<(Scenario, ValueField)> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = scenario("castalia_coarse.toml");
        let f = solve_checked(&s);
        (s, f)
    })
}

/// `g` measured in cells of the constrained axes.
pub fn g_cells(k: &ConstraintSet, spacing: &[f64], x: &[f64; 4]) -> f64 {
    let rho = (k.rho_min - x[0]).max(x[0] - k.rho_max) / spacing[0];
    let dm = (k.dm_min - x[3]).max(x[3] - k.dm_max) / spacing[3];
    rho.max(dm)
}

/// Distance beyond the target box in cells of each axis.
pub fn nu_cells(c: &TargetSet, spacing: &[f64], x: &[f64; 4]) -> f64 {
    (0..3)
        .map(|j| ((x[j] - c.center[j]).abs() - c.half_width[j]) / spacing[j])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Reconstruction success: the start lies in K, the flight keeps `g` within
/// two cells and ends within two cells of C, all without leaving the grid.
pub fn reconstruction_succeeds(result: &reachxfer::Result<Trajectory>, k: &ConstraintSet, c: &TargetSet, spacing: &[f64]) -> bool {
    let Ok(t) = result else {
        return false;
    };
    let coords: Vec<[f64; 4]> = t.samples.iter().map(|s| s.state.coords()).collect();
    let Some(last) = coords.last() else {
        return false;
    };
    k.contains(&coords[0])
        && coords.iter().all(|x| g_cells(k, spacing, x) <= 2.0)
        && nu_cells(c, spacing, last) <= 2.0
}

/// Nodes of slice `stamp` whose axis neighbours all share their sign of the
/// value, i.e. nodes outside a one-cell band around the zero level set.
pub fn off_band_nodes(field: &ValueField, stamp: usize) -> Vec<usize> {
    let g = field.grid();
    let slice = field.slice(stamp);
    let strides = g.strides();
    let mut idx = vec![0; g.dim()];
    (0..g.len())
        .filter(|&i| {
            g.unravel(i, &mut idx);
            let inside = slice[i] <= 0.0;
            (0..g.dim()).all(|d| {
                let lo = idx[d] > 0 && (slice[i - strides[d]] <= 0.0) != inside;
                let hi = idx[d] + 1 < g.axis(d).count && (slice[i + strides[d]] <= 0.0) != inside;
                !lo && !hi
            })
        })
        .collect()
}
