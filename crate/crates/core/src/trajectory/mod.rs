//! Optimal trajectory reconstruction from a value field.
//!
//! Starting at `r0` with transfer time `t_f`, the interval `[-t_f, 0]` is split
//! into `N` steps. At each step the costate is estimated from the field at the
//! remaining horizon, the Hamiltonian minimizer gives the control, and the
//! state is advanced with the adaptive integrator over one step.

mod interp;
mod smooth;

use serde::{Deserialize, Serialize};

pub use interp::{estimate_costate, interpolate_value, interpolate_value_clamped};
pub use smooth::smooth_controls;

use crate::bolza::BolzaSpec;
use crate::dynamics::{Control, DynamicsModel, PlanarState};
use crate::error::{Error, Result};
use crate::hamiltonian::{lattice_min, optimal_direction_planar, switching_function};
use crate::hjsolver::ValueField;
use crate::model::{ConstraintSet, TargetSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Time in `[-t_f, 0]`.
    pub time: f64,
    pub state: PlanarState,
    /// Control applied from this sample to the next (the last sample repeats
    /// the final control).
    pub control: Control,
    /// Interpolated field value at this sample and its remaining horizon.
    pub value: f64,
}

/// A reconstructed trajectory in normalized units.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Auxiliary cost state per sample (empty for Mayer fields).
    pub aux: Vec<Vec<f64>>,
    pub start: [f64; 4],
    pub transfer_time: f64,
    pub steps: usize,
    /// `nu` at the final state.
    pub final_nu: f64,
    /// Absolute final misses `[rho, v_rho, v_t]` from the target center.
    pub misses: [f64; 3],
    /// Largest constraint level `g` along the samples.
    pub max_g: f64,
    /// Steps whose costate needed a one-sided difference.
    pub one_sided_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&PlanarState> {
        self.samples.last().map(|s| &s.state)
    }

    /// Fraction of steps flown at full thrust.
    pub fn duty_cycle(&self) -> f64 {
        let steps = self.samples.len().saturating_sub(1);
        if steps == 0 {
            return 0.0;
        }
        self.samples[..steps].iter().map(|s| s.control.thrust).sum::<f64>() / steps as f64
    }

    /// Propellant used between the first and last sample.
    pub fn propellant_used(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => a.state.dm - b.state.dm,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub steps: usize,
    pub initial_theta: f64,
    /// Start even when the interpolated value exceeds the feasibility slack.
    pub force: bool,
    /// Feasibility slack; defaults to the largest grid spacing.
    pub slack: Option<f64>,
    /// Keep flying after the state leaves the grid box, steering with the
    /// field at the nearest box point. Off by default: leaving aborts.
    #[serde(default)]
    pub allow_exit: bool,
    /// Steer with the earliest stored horizon whose value is within this
    /// slack of the remaining-horizon value. Once extra time stops lowering
    /// the value, this flies the shorter plan and waits in the target
    /// instead of drifting.
    #[serde(default)]
    pub horizon_tolerance: Option<f64>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            steps: 4000,
            initial_theta: 0.0,
            force: false,
            slack: None,
            allow_exit: false,
            horizon_tolerance: None,
        }
    }
}

/// Problem data shared by every reconstruction against one field.
pub struct Reconstructor<'a> {
    pub field: &'a ValueField,
    pub model: &'a DynamicsModel,
    pub constraints: &'a ConstraintSet,
    pub target: &'a TargetSet,
    /// Present for Bolza fields, whose extra coordinates are the cost states.
    pub bolza: Option<&'a BolzaSpec>,
}

impl<'a> Reconstructor<'a> {
    pub fn mayer(field: &'a ValueField, model: &'a DynamicsModel, constraints: &'a ConstraintSet, target: &'a TargetSet) -> Self {
        Self {
            field,
            model,
            constraints,
            target,
            bolza: None,
        }
    }

    fn aux_dim(&self) -> usize {
        self.bolza.map_or(0, BolzaSpec::dimension)
    }

    fn full_state(&self, x: &[f64; 4], z: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        v.extend_from_slice(z);
        v
    }

    /// Minimizer of the (Bolza) Hamiltonian at costate `q`.
    pub fn control_from_costate(&self, x: &[f64], q: &[f64]) -> Control {
        let (alpha, _) = optimal_direction_planar(q[1], q[2]);
        let mut switching = switching_function(self.model, q, x[3]);
        if let Some(spec) = self.bolza {
            switching += q[4..].iter().zip(&spec.running.per_thrust).map(|(a, b)| a * b).sum::<f64>();
        }
        Control::planar(alpha, if switching >= 0.0 { 1.0 } else { 0.0 })
    }

    /// Feasibility slack used by [`Self::reconstruct`].
    pub fn default_slack(&self) -> f64 {
        self.field.grid().max_spacing()
    }

    pub fn value(&self, x: &[f64; 4], z: &[f64], horizon: f64) -> Result<f64> {
        interpolate_value(self.field, &self.full_state(x, z), horizon)
    }

    pub fn reconstruct(&self, x0: [f64; 4], z0: &[f64], transfer_time: f64, opts: &ReconstructOptions) -> Result<Trajectory> {
        if opts.steps == 0 {
            return Err(Error::Config("reconstruction needs at least one step".into()));
        }
        if z0.len() != self.aux_dim() || self.field.grid().dim() != 4 + self.aux_dim() {
            return Err(Error::Config("initial cost state does not match the field".into()));
        }
        if !(transfer_time >= 0.0) {
            return Err(Error::domain("transfer time must be non-negative"));
        }
        let value0 = self.value(&x0, z0, transfer_time)?;
        let slack = opts.slack.unwrap_or_else(|| self.default_slack());
        if value0 > slack && !opts.force {
            return Err(Error::Infeasible { value: value0, slack });
        }
        let steps = if transfer_time == 0.0 { 0 } else { opts.steps };
        let h = if steps == 0 { 0.0 } else { transfer_time / steps as f64 };
        let mut traj = Trajectory {
            start: x0,
            transfer_time,
            steps,
            max_g: f64::NEG_INFINITY,
            ..Default::default()
        };
        let mut state = PlanarState::from_coords(x0, opts.initial_theta);
        let mut z = z0.to_vec();
        let mut control = Control::coast();
        for k in 0..=steps {
            let horizon = if k == steps { 0.0 } else { transfer_time - k as f64 * h };
            let coords = state.coords();
            let full = self.field.grid().project(&self.full_state(&coords, &z));
            let (value, _) = interpolate_value_clamped(self.field, &full, horizon)?;
            if k < steps {
                let mut next_horizon = (transfer_time - (k + 1) as f64 * h).max(0.0);
                if let Some(tol) = opts.horizon_tolerance {
                    next_horizon = self.earliest_horizon(&full, next_horizon, tol)?;
                }
                let (q, one_sided) = estimate_costate(self.field, &full, next_horizon)?;
                traj.one_sided_steps += usize::from(one_sided);
                control = self.control_from_costate(&coords, &q);
            }
            traj.max_g = traj.max_g.max(self.constraints.g(&coords));
            traj.samples.push(Sample {
                time: -transfer_time + k as f64 * h,
                state,
                control,
                value,
            });
            if self.bolza.is_some() {
                traj.aux.push(z.clone());
            }
            if k == steps {
                break;
            }
            let next = match self.bolza {
                Some(spec) => {
                    let (s, nz) = spec.propagate(self.model, &state, &z, &control, h)?;
                    z = nz;
                    s
                }
                None => self.model.propagate_planar(&state, &control, h)?,
            };
            if !opts.allow_exit && !self.field.grid().contains(&self.full_state(&next.coords(), &z)) {
                self.finish(&mut traj);
                return Err(Error::LeftGrid {
                    step: k + 1,
                    steps,
                    partial: Box::new(traj),
                });
            }
            state = next;
        }
        self.finish(&mut traj);
        Ok(traj)
    }

    fn earliest_horizon(&self, full: &[f64], horizon: f64, tol: f64) -> Result<f64> {
        let (v, _) = interpolate_value_clamped(self.field, full, horizon)?;
        let bound = v.max(0.0) + tol;
        for &t in self.field.stamps().iter().filter(|&&t| t < horizon) {
            if interpolate_value_clamped(self.field, full, t)?.0 <= bound {
                return Ok(t);
            }
        }
        Ok(horizon)
    }

    fn finish(&self, traj: &mut Trajectory) {
        if let Some(last) = traj.samples.last() {
            let x = last.state.coords();
            traj.final_nu = self.target.nu(&x);
            traj.misses = self.target.misses(&x);
        }
    }

    /// Value `w(x + h f(x, u), horizon) v g(x)` reached by one explicit step.
    pub fn one_step_value(&self, x: &[f64; 4], u: &Control, horizon: f64, h: f64) -> Result<f64> {
        let f = self.model.planar_solver_rhs(x, u.alpha, u.thrust);
        let y = [x[0] + h * f[0], x[1] + h * f[1], x[2] + h * f[2], x[3] + h * f[3]];
        let (v, _) = interpolate_value_clamped(self.field, &y, horizon)?;
        Ok(v.max(self.constraints.g(x)))
    }

    /// Exhaustive minimization of [`Self::one_step_value`] over an
    /// `n_alpha x n_thrust` control lattice.
    pub fn argmin_control_oracle(&self, x: &[f64; 4], horizon: f64, h: f64, n_alpha: usize, n_thrust: usize) -> Result<(Control, f64)> {
        let mut best = (Control::coast(), f64::INFINITY);
        let mut failure = None;
        lattice_min(n_alpha, n_thrust, |alpha, thrust| {
            let u = Control::planar(alpha, thrust);
            match self.one_step_value(x, &u, horizon, h) {
                Ok(v) => {
                    if v < best.1 {
                        best = (u, v);
                    }
                    v
                }
                Err(e) => {
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(best),
        }
    }
}

/// Generic costate-feedback loop for any field: from `x0` with horizon `t_f`,
/// `advance(x, q, h)` returns the state after one step of length `h` under the
/// control chosen from costate `q`. Returns the `steps + 1` visited states.
pub fn follow_costate(
    field: &ValueField,
    x0: &[f64],
    transfer_time: f64,
    steps: usize,
    mut advance: impl FnMut(&[f64], &[f64], f64) -> Vec<f64>,
) -> Result<Vec<Vec<f64>>> {
    if steps == 0 {
        return Err(Error::Config("need at least one step".into()));
    }
    let h = transfer_time / steps as f64;
    let mut states = vec![x0.to_vec()];
    for k in 0..steps {
        let x = &states[k];
        let horizon = (transfer_time - (k + 1) as f64 * h).max(0.0);
        let (q, _) = estimate_costate(field, x, horizon)?;
        let next = advance(x, &q, h);
        if !field.grid().contains(&next) {
            return Err(Error::OutOfHull {
                coord: format!("{next:?} after step {}", k + 1),
            });
        }
        states.push(next);
    }
    Ok(states)
}
