//! The spacecraft reach problems as [`HamiltonianSystem`]s, plus the
//! scenario-level solve entry points.

use crate::bolza::BolzaSpec;
use crate::config::Scenario;
use crate::dynamics::DynamicsModel;
use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::hamiltonian::{bolza_hamiltonian, dissipation_coefficients, hamiltonian};
use crate::hjsolver::{HamiltonianSystem, Solver, SolverSettings, ValueField};
use crate::model::{ConstraintSet, TargetSet};

/// Planar problem on `[rho, v_rho, v_t, dm]`.
pub struct PlanarReachSystem {
    pub model: DynamicsModel,
}

impl HamiltonianSystem for PlanarReachSystem {
    #[inline]
    fn hamiltonian(&self, x: &[f64], p: &[f64]) -> f64 {
        hamiltonian(&self.model, x, p)
    }

    fn dissipation(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        if grid.dim() != 4 {
            return Err(Error::Grid(format!("planar problem needs 4 dimensions, got {}", grid.dim())));
        }
        Ok(dissipation_coefficients(&self.model, &grid.bounds())?.to_vec())
    }
}

/// Bolza problem on `[rho, v_rho, v_t, dm, z_1..z_p]`.
pub struct BolzaReachSystem {
    pub model: DynamicsModel,
    pub spec: BolzaSpec,
}

impl HamiltonianSystem for BolzaReachSystem {
    #[inline]
    fn hamiltonian(&self, x: &[f64], p: &[f64]) -> f64 {
        -bolza_hamiltonian(&self.model, &x[..4], &p[..4], &p[4..], &self.spec.running)
    }

    fn dissipation(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let p = self.spec.dimension();
        if grid.dim() != 4 + p {
            return Err(Error::Grid(format!("Bolza problem needs {} dimensions, got {}", 4 + p, grid.dim())));
        }
        let mut alpha = dissipation_coefficients(&self.model, &grid.bounds()[..4])?.to_vec();
        for k in 0..p {
            alpha.push(self.spec.running.offset[k].abs() + self.spec.running.per_thrust[k].abs());
        }
        Ok(alpha)
    }
}

/// Signed distance-like level of the box spanned by the first four axes:
/// negative inside, zero on the faces.
pub fn box_level(grid: &GridSpec, x: &[f64]) -> f64 {
    grid.axes()
        .iter()
        .take(4)
        .zip(x)
        .filter(|(a, _)| !a.periodic)
        .map(|(a, &v)| (a.min - v).max(v - a.max))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn constraint_level(grid: &GridSpec, k: &ConstraintSet, x: &[f64], confine: bool) -> f64 {
    let g = k.g(&x[..4]);
    if confine {
        g.max(box_level(grid, x))
    } else {
        g
    }
}

/// `(max(nu, g), g)` sampled on the planar grid; with `confine` the box
/// level joins `g`.
pub fn terminal_and_obstacle(grid: &GridSpec, k: &ConstraintSet, c: &TargetSet, confine: bool) -> (Vec<f64>, Vec<f64>) {
    let obstacle = grid.sample(|x| constraint_level(grid, k, x, confine));
    let terminal = grid
        .sample(|x| c.nu(x))
        .into_iter()
        .zip(&obstacle)
        .map(|(nu, g)| nu.max(*g))
        .collect();
    (terminal, obstacle)
}

/// Reach-avoid value function `w(x, t)` of the planar problem.
pub fn solve_planar(
    model: &DynamicsModel,
    grid: &GridSpec,
    k: &ConstraintSet,
    c: &TargetSet,
    stamps: &[f64],
    settings: SolverSettings,
    progress: impl FnMut(usize, f64),
) -> Result<ValueField> {
    let system = PlanarReachSystem { model: model.clone() };
    let (terminal, obstacle) = terminal_and_obstacle(grid, k, c, settings.confine);
    Solver::new(&system, grid.clone(), obstacle, settings)?.march_with(&terminal, stamps, progress)
}

pub fn solve_value_function(scenario: &Scenario, progress: impl FnMut(usize, f64)) -> Result<ValueField> {
    solve_planar(
        &scenario.model(),
        &scenario.grid,
        &scenario.constraints(),
        &scenario.target_set(),
        &scenario.stamps(),
        scenario.solver,
        progress,
    )
}

/// Extended grid `planar x z_1 x ... x z_p`.
pub fn bolza_grid(planar: &GridSpec, z_axes: &[Axis]) -> Result<GridSpec> {
    let mut axes = planar.axes().to_vec();
    axes.extend_from_slice(z_axes);
    GridSpec::new(axes)
}

/// `(max_i(J_t^i(x) - z_i) v nu(x) v g(x), obstacle)` sampled on the extended
/// grid. The obstacle is `g`, raised to `max_i(J_t^i(x) - z_i)` when that
/// bound is monotone along trajectories so the scheme cannot undershoot it.
pub fn bolza_terminal_and_obstacle(
    grid: &GridSpec,
    k: &ConstraintSet,
    c: &TargetSet,
    spec: &BolzaSpec,
    confine: bool,
) -> (Vec<f64>, Vec<f64>) {
    let bounded = spec.terminal_bound_is_monotone();
    let obstacle = grid.sample(|x| {
        let g = constraint_level(grid, k, x, confine);
        if bounded {
            g.max(spec.terminal_value(&x[..4], &x[4..]))
        } else {
            g
        }
    });
    let terminal = grid
        .sample(|x| spec.terminal_value(&x[..4], &x[4..]).max(c.nu(&x[..4])))
        .into_iter()
        .zip(&obstacle)
        .map(|(v, g)| v.max(*g))
        .collect();
    (terminal, obstacle)
}

/// `theta(x, z, t)` of the Bolza problem.
#[allow(clippy::too_many_arguments)]
pub fn solve_bolza(
    model: &DynamicsModel,
    planar: &GridSpec,
    z_axes: &[Axis],
    k: &ConstraintSet,
    c: &TargetSet,
    spec: &BolzaSpec,
    stamps: &[f64],
    settings: SolverSettings,
    progress: impl FnMut(usize, f64),
) -> Result<ValueField> {
    if z_axes.len() != spec.dimension() {
        return Err(Error::Config(format!(
            "{} z axes for a cost of dimension {}",
            z_axes.len(),
            spec.dimension()
        )));
    }
    let grid = bolza_grid(planar, z_axes)?;
    let (terminal, obstacle) = bolza_terminal_and_obstacle(&grid, k, c, spec, settings.confine);
    let system = BolzaReachSystem {
        model: model.clone(),
        spec: spec.clone(),
    };
    Solver::new(&system, grid, obstacle, settings)?.march_with(&terminal, stamps, progress)
}

pub fn solve_bolza_value_function(scenario: &Scenario, progress: impl FnMut(usize, f64)) -> Result<ValueField> {
    let bolza = scenario
        .bolza
        .as_ref()
        .ok_or_else(|| Error::Config("scenario has no [bolza] section".into()))?;
    let spec = BolzaSpec::from_objective(bolza.objective, &scenario.model());
    solve_bolza(
        &scenario.model(),
        &scenario.grid,
        &[bolza.z_axis],
        &scenario.constraints(),
        &scenario.target_set(),
        &spec,
        &scenario.stamps(),
        scenario.solver,
        progress,
    )
}
