//! Bolza objectives through an auxiliary cost state `z`.
//!
//! Along a trajectory on `[-t_f, 0]` the auxiliary state starts at
//! `z(-t_f) = z0` and obeys `z' = -J_r`, so at the final time
//! `J_t(r(0)) - z(0) = J_t(r(0)) + int J_r ds - z0`.

use serde::{Deserialize, Serialize};

use crate::config::BolzaObjective;
use crate::dynamics::{Control, DynamicsModel, PlanarState};
use crate::error::Result;
use crate::hamiltonian::AffineRunningCost;
use crate::model::idx;

/// `J_t(x) = offset + gradient . x` per objective, `x` in solver coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTerminalCost {
    pub offset: Vec<f64>,
    pub gradient: Vec<[f64; 4]>,
}

impl AffineTerminalCost {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.gradient)
            .map(|(o, g)| o + g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BolzaSpec {
    pub terminal: AffineTerminalCost,
    pub running: AffineRunningCost,
}

impl BolzaSpec {
    pub fn new(terminal: AffineTerminalCost, running: AffineRunningCost) -> Self {
        assert_eq!(terminal.offset.len(), running.offset.len(), "cost dimensions differ");
        Self { terminal, running }
    }

    pub fn from_objective(objective: BolzaObjective, _model: &DynamicsModel) -> Self {
        match objective {
            BolzaObjective::RemainingPropellant => remaining_propellant_objective(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.terminal.offset.len()
    }

    /// Lipschitz constant of `J_t` in the max-norm (largest gradient 1-norm).
    pub fn terminal_lipschitz(&self) -> f64 {
        self.terminal
            .gradient
            .iter()
            .map(|g| g.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Lipschitz constant of `J_r` in the state (the running costs are state-free).
    pub fn running_lipschitz(&self) -> f64 {
        0.0
    }

    /// `max_i (J_t^i(x) - z_i)`.
    pub fn terminal_value(&self, x: &[f64], z: &[f64]) -> f64 {
        self.terminal
            .eval(x)
            .iter()
            .zip(z)
            .map(|(j, z)| j - z)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when `max_i(J_t^i(x) - z_i)` can never decrease along a trajectory:
    /// each terminal cost depends on `dm` alone with a non-positive slope
    /// (`dm` only falls) and the running costs are non-negative (`z` only
    /// falls). The value then stays above that bound at every horizon.
    pub fn terminal_bound_is_monotone(&self) -> bool {
        let terminal = self
            .terminal
            .gradient
            .iter()
            .all(|g| (0..4).all(|k| if k == idx::DM { g[k] <= 0.0 } else { g[k] == 0.0 }));
        let running = self.running.offset.iter().chain(&self.running.per_thrust).all(|&v| v >= 0.0);
        terminal && running
    }

    /// `(f(x, u), -J_r(x, u))`.
    pub fn augmented_rhs(&self, model: &DynamicsModel, s: &PlanarState, u: &Control) -> Result<([f64; 5], Vec<f64>)> {
        let f = model.planar_rhs(s, u)?;
        let z = self.running.eval(u.thrust).into_iter().map(|j| -j).collect();
        Ok((f, z))
    }

    /// Advances state and auxiliary cost under a constant control. The running
    /// cost does not depend on the state, so `z` advances exactly.
    pub fn propagate(&self, model: &DynamicsModel, s: &PlanarState, z: &[f64], u: &Control, duration: f64) -> Result<(PlanarState, Vec<f64>)> {
        let next = model.propagate_planar(s, u, duration)?;
        let rate = self.running.eval(u.thrust);
        let z = z.iter().zip(rate).map(|(z, j)| z - j * duration).collect();
        Ok((next, z))
    }
}

/// Maximize the propellant left at arrival: `p = 1`, `J_t = -dm`, `J_r = 0`.
pub fn remaining_propellant_objective() -> BolzaSpec {
    let mut gradient = [0.0; 4];
    gradient[idx::DM] = -1.0;
    BolzaSpec::new(
        AffineTerminalCost {
            offset: vec![0.0],
            gradient: vec![gradient],
        },
        AffineRunningCost::zero(1),
    )
}

/// Propellant burned, as a running cost: `J_r = k_m T`.
pub fn fuel_running_cost(model: &DynamicsModel) -> AffineRunningCost {
    AffineRunningCost {
        offset: vec![0.0],
        per_thrust: vec![model.mass_rate],
    }
}
