//! Closed-form minimization of `q . f(r, u)` over the control set and the
//! resulting Hamiltonian `H(r, q) = -min_u q . f(r, u)`.
//!
//! Costates follow the solver coordinates `[rho, v_rho, v_t, dm]`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{Control, DynamicsModel};
use crate::error::{Error, Result};

/// Optimal planar thrust angle for velocity costates `(q_vrho, q_vt)`:
/// thrust points against the costate. Returns `(alpha, value)` where
/// `value = q_vrho cos(alpha) + q_vt sin(alpha) = -|(q_vrho, q_vt)|`.
/// A zero costate yields `alpha = 0`.
pub fn optimal_direction_planar(q_vrho: f64, q_vt: f64) -> (f64, f64) {
    let norm = q_vrho.hypot(q_vt);
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    ((-q_vt).atan2(-q_vrho), -norm)
}

/// Optimal 3D thrust angles for velocity costates `(q4, q5, q6)` along
/// `(e_rho, e_theta, e_psi)`. Returns `(alpha, delta, value)` with `alpha` in
/// `[-pi, pi]`, `delta` in `[-pi/2, pi/2]` and
/// `value = q4 cos(alpha) + sin(alpha) (q5 sin(delta) + q6 cos(delta)) = -|q|`.
pub fn optimal_direction_3d(q4: f64, q5: f64, q6: f64) -> (f64, f64, f64) {
    let delta = if q6 != 0.0 {
        (q5 / q6).atan()
    } else if q5 > 0.0 {
        FRAC_PI_2
    } else if q5 < 0.0 {
        -FRAC_PI_2
    } else {
        0.0
    };
    // s = q5 sin(delta) + q6 cos(delta) = +-|(q5, q6)|; the sign is absorbed by alpha.
    let s = q5 * delta.sin() + q6 * delta.cos();
    let norm = (q4 * q4 + q5 * q5 + q6 * q6).sqrt();
    if norm == 0.0 {
        return (0.0, delta, 0.0);
    }
    let alpha = (-s).atan2(-q4);
    (alpha, delta, -norm)
}

/// Value of `q4 cos(alpha) + sin(alpha) (q5 sin(delta) + q6 cos(delta))`.
pub fn direction_value_3d(q4: f64, q5: f64, q6: f64, alpha: f64, delta: f64) -> f64 {
    q4 * alpha.cos() + alpha.sin() * (q5 * delta.sin() + q6 * delta.cos())
}

/// Bang-bang switching function: full thrust when non-negative.
#[inline]
pub fn switching_function(model: &DynamicsModel, q: &[f64], dm: f64) -> f64 {
    model.thrust_accel(1.0, dm) * q[1].hypot(q[2]) + model.mass_rate * q[3]
}

/// Optimal thrust in units of `T_max`: exactly `1.0` or `0.0` (ties go to `1.0`).
#[inline]
pub fn optimal_thrust(model: &DynamicsModel, q: &[f64], dm: f64) -> f64 {
    if switching_function(model, q, dm) >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Minimizing control of `q . f(x, u)`.
pub fn optimal_control(model: &DynamicsModel, x: &[f64], q: &[f64]) -> Control {
    let (alpha, _) = optimal_direction_planar(q[1], q[2]);
    Control::planar(alpha, optimal_thrust(model, q, x[3]))
}

#[inline]
pub fn drift_product(model: &DynamicsModel, x: &[f64], q: &[f64]) -> f64 {
    let d = model.planar_drift(x);
    q[0] * d[0] + q[1] * d[1] + q[2] * d[2]
}

/// `H(x, q) = -q . f_drift + max(0, switching_function)`.
#[inline]
pub fn hamiltonian(model: &DynamicsModel, x: &[f64], q: &[f64]) -> f64 {
    -drift_product(model, x, q) + switching_function(model, q, x[3]).max(0.0)
}

/// `min_u q . f` over an `n_alpha x n_thrust` lattice including the endpoints
/// of `[-pi, pi] x [0, 1]`, negated so it approximates [`hamiltonian`].
pub fn hamiltonian_bruteforce(model: &DynamicsModel, x: &[f64], q: &[f64], n_alpha: usize, n_thrust: usize) -> f64 {
    -lattice_min(n_alpha, n_thrust, |alpha, thrust| {
        let f = model.planar_solver_rhs(x, alpha, thrust);
        q.iter().zip(f).map(|(a, b)| a * b).sum()
    })
}

pub(crate) fn lattice_min(n_alpha: usize, n_thrust: usize, mut eval: impl FnMut(f64, f64) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..n_alpha {
        let alpha = -PI + 2.0 * PI * i as f64 / (n_alpha - 1) as f64;
        for j in 0..n_thrust {
            let thrust = j as f64 / (n_thrust - 1) as f64;
            best = best.min(eval(alpha, thrust));
        }
    }
    best
}

/// Running cost affine in thrust: `J_r(x, u) = offset + per_thrust * T`
/// (thrust in units of `T_max`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineRunningCost {
    pub offset: Vec<f64>,
    pub per_thrust: Vec<f64>,
}

impl AffineRunningCost {
    pub fn zero(p: usize) -> Self {
        Self {
            offset: vec![0.0; p],
            per_thrust: vec![0.0; p],
        }
    }

    pub fn eval(&self, thrust: f64) -> Vec<f64> {
        self.offset.iter().zip(&self.per_thrust).map(|(a, b)| a + b * thrust).collect()
    }
}

/// `min_u (q_r . f(x, u) - q_z . J_r(x, u))`.
pub fn bolza_hamiltonian(model: &DynamicsModel, x: &[f64], q_r: &[f64], q_z: &[f64], cost: &AffineRunningCost) -> f64 {
    let offset: f64 = q_z.iter().zip(&cost.offset).map(|(a, b)| a * b).sum();
    let slope: f64 = q_z.iter().zip(&cost.per_thrust).map(|(a, b)| a * b).sum();
    let per_thrust = -switching_function(model, q_r, x[3]) - slope;
    drift_product(model, x, q_r) - offset + per_thrust.min(0.0)
}

/// Lattice estimate of [`bolza_hamiltonian`].
pub fn bolza_hamiltonian_bruteforce(
    model: &DynamicsModel,
    x: &[f64],
    q_r: &[f64],
    q_z: &[f64],
    cost: &AffineRunningCost,
    n_alpha: usize,
    n_thrust: usize,
) -> f64 {
    lattice_min(n_alpha, n_thrust, |alpha, thrust| {
        let f = model.planar_solver_rhs(x, alpha, thrust);
        let qf: f64 = q_r.iter().zip(f).map(|(a, b)| a * b).sum();
        let qj: f64 = q_z.iter().zip(cost.eval(thrust)).map(|(a, b)| a * b).sum();
        qf - qj
    })
}

/// Global Lax-Friedrichs coefficients `alpha_k >= |dH/dq_k|` over the state
/// box `bounds` (`[rho, v_rho, v_t, dm]` as `(min, max)` pairs).
pub fn dissipation_coefficients(model: &DynamicsModel, bounds: &[(f64, f64)]) -> Result<[f64; 4]> {
    if bounds.len() < 4 || bounds.iter().any(|(a, b)| !a.is_finite() || !b.is_finite() || a > b) {
        return Err(Error::domain("dissipation bounds must be four finite (min, max) pairs"));
    }
    let (rho_lo, rho_hi) = bounds[0];
    let (vr_lo, vr_hi) = bounds[1];
    let (vt_lo, vt_hi) = bounds[2];
    let (dm_lo, _) = bounds[3];
    if !(rho_lo > 0.0) {
        return Err(Error::domain("dissipation bounds need rho > 0"));
    }
    let w = model.spin;
    let vr_max = vr_lo.abs().max(vr_hi.abs());
    let thrust = model.thrust_accel(1.0, dm_lo.min(0.0).max(-0.5 * model.dry_mass));

    // a_rho = (v_t + w rho)^2 / rho + U(rho): sample rho, solve the v_t range exactly.
    let samples = 2000;
    let mut a_rho_max: f64 = 0.0;
    let mut rate_max: f64 = 0.0;
    for i in 0..=samples {
        let rho = rho_lo + (rho_hi - rho_lo) * i as f64 / samples as f64;
        let lo = vt_lo + w * rho;
        let hi = vt_hi + w * rho;
        let sq_max = lo.abs().max(hi.abs()).powi(2);
        let sq_min = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()).powi(2) };
        let u = model.gravity_radial(rho);
        a_rho_max = a_rho_max.max((sq_max / rho + u).abs()).max((sq_min / rho + u).abs());
        rate_max = rate_max.max((vt_lo / rho + 2.0 * w).abs()).max((vt_hi / rho + 2.0 * w).abs());
    }
    let margin = 1.02;
    Ok([
        vr_max,
        margin * a_rho_max + thrust,
        margin * vr_max * rate_max + thrust,
        model.mass_rate,
    ])
}
