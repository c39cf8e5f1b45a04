//! Spacecraft equations of motion in the asteroid-fixed rotating frame.
//!
//! Three forms are provided: Cartesian `[x, y, z, vx, vy, vz, dm]`, spherical
//! `[rho, theta, psi, v_rho, v_t, v_perp, dm]` (psi is the polar angle, the
//! equator sits at `psi = pi/2`) and the planar reduction
//! `[rho, theta, v_rho, v_t, dm]` used by the solver. Every form works in the
//! units of the [`DynamicsModel`] it is evaluated with; build the model from
//! [`Normalization::identity`] to work in SI.
//!
//! Thrust is expressed in units of `T_max`, so `thrust` lies in `[0, 1]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use ode_solvers::{dopri5::Dopri5, OutputType, SVector, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AsteroidParams, Normalization, SpacecraftParams};

/// Relative tolerance of trajectory propagation.
pub const PROPAGATION_RTOL: f64 = 1e-10;
/// Absolute tolerance of trajectory propagation.
pub const PROPAGATION_ATOL: f64 = 1e-12;

/// Thrust command. `delta` is ignored by the planar form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Control {
    /// Incidence angle in `[-pi, pi]`.
    pub alpha: f64,
    /// Sideslip angle in `[-pi/2, pi/2]`.
    pub delta: f64,
    /// Thrust magnitude in units of `T_max`, within `[0, 1]`.
    pub thrust: f64,
}

impl Control {
    pub fn planar(alpha: f64, thrust: f64) -> Self {
        Self {
            alpha,
            delta: 0.0,
            thrust,
        }
    }

    pub fn coast() -> Self {
        Self::default()
    }

    /// Membership in the compact control set `U`.
    pub fn is_admissible(&self) -> bool {
        (-PI..=PI).contains(&self.alpha) && (-FRAC_PI_2..=FRAC_PI_2).contains(&self.delta) && (0.0..=1.0).contains(&self.thrust)
    }
}

/// Planar state in display form (solver coordinates plus `theta`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub rho: f64,
    pub theta: f64,
    pub v_rho: f64,
    pub v_t: f64,
    pub dm: f64,
}

impl PlanarState {
    pub fn from_coords(x: [f64; 4], theta: f64) -> Self {
        Self {
            rho: x[0],
            theta,
            v_rho: x[1],
            v_t: x[2],
            dm: x[3],
        }
    }

    /// Solver coordinates `[rho, v_rho, v_t, dm]`.
    pub fn coords(&self) -> [f64; 4] {
        [self.rho, self.v_rho, self.v_t, self.dm]
    }

    fn to_vec(self) -> [f64; 5] {
        [self.rho, self.theta, self.v_rho, self.v_t, self.dm]
    }

    fn from_vec(v: [f64; 5]) -> Self {
        Self {
            rho: v[0],
            theta: v[1],
            v_rho: v[2],
            v_t: v[3],
            dm: v[4],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphericalState {
    pub rho: f64,
    pub theta: f64,
    pub psi: f64,
    pub v_rho: f64,
    pub v_t: f64,
    pub v_perp: f64,
    pub dm: f64,
}

impl SphericalState {
    pub fn to_array(self) -> [f64; 7] {
        [self.rho, self.theta, self.psi, self.v_rho, self.v_t, self.v_perp, self.dm]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub dm: f64,
}

impl CartesianState {
    pub fn to_array(self) -> [f64; 7] {
        let [x, y, z] = self.position;
        let [vx, vy, vz] = self.velocity;
        [x, y, z, vx, vy, vz, self.dm]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            position: [a[0], a[1], a[2]],
            velocity: [a[3], a[4], a[5]],
            dm: a[6],
        }
    }
}

/// Local orthonormal frame `(e_rho, e_theta, e_psi)` at `(theta, psi)`.
fn spherical_basis(theta: f64, psi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    [[sp * ct, sp * st, cp], [-st, ct, 0.0], [cp * ct, cp * st, -sp]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cartesian_from_spherical(s: &SphericalState) -> CartesianState {
    let [er, et, ep] = spherical_basis(s.theta, s.psi);
    let mut position = [0.0; 3];
    let mut velocity = [0.0; 3];
    for i in 0..3 {
        position[i] = s.rho * er[i];
        velocity[i] = s.v_rho * er[i] + s.v_t * et[i] + s.v_perp * ep[i];
    }
    CartesianState {
        position,
        velocity,
        dm: s.dm,
    }
}

pub fn spherical_from_cartesian(c: &CartesianState) -> SphericalState {
    let [x, y, z] = c.position;
    let rho = (x * x + y * y + z * z).sqrt();
    let theta = y.atan2(x);
    let psi = (x * x + y * y).sqrt().atan2(z);
    let [er, et, ep] = spherical_basis(theta, psi);
    SphericalState {
        rho,
        theta,
        psi,
        v_rho: dot(&c.velocity, &er),
        v_t: dot(&c.velocity, &et),
        v_perp: dot(&c.velocity, &ep),
        dm: c.dm,
    }
}

/// Radial gravitational acceleration profile `U_rho(rho)` in SI units
/// (negative values point toward the body). The tangential component is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GravityModel {
    PointMass { gm: f64 },
    /// Linearly interpolated `(rho [m], accel [m/s^2])` table, clamped at the ends.
    Tabulated { rho: Vec<f64>, accel: Vec<f64> },
}

impl GravityModel {
    pub fn radial_accel(&self, rho: f64) -> f64 {
        match self {
            GravityModel::PointMass { gm } => -gm / (rho * rho),
            GravityModel::Tabulated { rho: r, accel } => {
                if rho <= r[0] {
                    return accel[0];
                }
                let last = r.len() - 1;
                if rho >= r[last] {
                    return accel[last];
                }
                let i = r.partition_point(|&v| v <= rho) - 1;
                let w = (rho - r[i]) / (r[i + 1] - r[i]);
                accel[i] * (1.0 - w) + accel[i + 1] * w
            }
        }
    }

    pub fn tabulated(rho: Vec<f64>, accel: Vec<f64>) -> Result<Self> {
        if rho.len() < 2 || rho.len() != accel.len() {
            return Err(Error::Config(format!(
                "gravity table needs >= 2 rows of equal length (got {} radii, {} accelerations)",
                rho.len(),
                accel.len()
            )));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("gravity table radii must be strictly increasing".into()));
        }
        if rho.iter().chain(&accel).any(|v| !v.is_finite()) {
            return Err(Error::Config("gravity table contains non-finite values".into()));
        }
        Ok(GravityModel::Tabulated { rho, accel })
    }

    /// Two-column whitespace or comma separated text; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rho = Vec::new();
        let mut accel = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{}:{}: cannot parse '{s}'", path.display(), lineno + 1)))
            };
            if cols.len() != 2 {
                return Err(Error::Config(format!(
                    "{}:{}: expected 2 columns, found {}",
                    path.display(),
                    lineno + 1,
                    cols.len()
                )));
            }
            rho.push(parse(cols[0])?);
            accel.push(parse(cols[1])?);
        }
        Self::tabulated(rho, accel)
    }

    /// True when the profile points toward the body on `[lo, hi]`.
    pub fn is_attractive_on(&self, lo: f64, hi: f64) -> bool {
        match self {
            GravityModel::PointMass { gm } => *gm > 0.0,
            GravityModel::Tabulated { rho, accel } => {
                let inner = rho.iter().zip(accel).filter(|(r, _)| (lo..=hi).contains(*r)).all(|(_, a)| *a < 0.0);
                inner && self.radial_accel(lo) < 0.0 && self.radial_accel(hi) < 0.0
            }
        }
    }
}

/// Equations of motion in the units of a [`Normalization`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsModel {
    /// Spin rate times the time scale.
    pub spin: f64,
    /// Full-thrust acceleration of the dry spacecraft.
    pub thrust_constant: f64,
    /// Dry mass in mass units.
    pub dry_mass: f64,
    /// Propellant flow at full thrust, mass units per time unit.
    pub mass_rate: f64,
    pub gravity: GravityModel,
    length_scale: f64,
    accel_scale: f64,
}

impl DynamicsModel {
    pub fn new(spacecraft: &SpacecraftParams, asteroid: &AsteroidParams, gravity: GravityModel, norm: &Normalization) -> Self {
        Self {
            spin: asteroid.spin_rate * norm.time(),
            thrust_constant: norm.thrust_constant,
            dry_mass: norm.mass_from_si(spacecraft.dry_mass),
            mass_rate: spacecraft.max_thrust * norm.time() / (spacecraft.exhaust_velocity * norm.mass),
            gravity,
            length_scale: norm.length,
            accel_scale: norm.acceleration(),
        }
    }

    /// Radial gravity at normalized radius `rho`, normalized.
    pub fn gravity_radial(&self, rho: f64) -> f64 {
        self.gravity.radial_accel(rho * self.length_scale) / self.accel_scale
    }

    /// Thrust acceleration magnitude for thrust `thrust` (units of `T_max`).
    #[inline]
    pub fn thrust_accel(&self, thrust: f64, dm: f64) -> f64 {
        self.thrust_constant * thrust * self.dry_mass / (self.dry_mass + dm)
    }

    fn check_mass(&self, dm: f64) -> Result<()> {
        if self.dry_mass + dm > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("total mass {} is not positive", self.dry_mass + dm)))
        }
    }

    /// Non-thrust accelerations `(a_rho, a_t)` of the planar reduction.
    #[inline]
    pub fn planar_accel(&self, rho: f64, v_rho: f64, v_t: f64) -> (f64, f64) {
        let w = self.spin;
        let a_rho = v_t * v_t / rho + self.gravity_radial(rho) + w * w * rho + 2.0 * w * v_t;
        let a_t = -v_rho * v_t / rho - 2.0 * w * v_rho;
        (a_rho, a_t)
    }

    /// Control-free part of the solver dynamics `[rho, v_rho, v_t, dm]`.
    #[inline]
    pub fn planar_drift(&self, x: &[f64]) -> [f64; 4] {
        let (a_rho, a_t) = self.planar_accel(x[0], x[1], x[2]);
        [x[1], a_rho, a_t, 0.0]
    }

    /// Solver-form dynamics without argument checks.
    #[inline]
    pub fn planar_solver_rhs(&self, x: &[f64], alpha: f64, thrust: f64) -> [f64; 4] {
        let [d0, d1, d2, _] = self.planar_drift(x);
        let a = self.thrust_accel(thrust, x[3]);
        [d0, d1 + a * alpha.cos(), d2 + a * alpha.sin(), -self.mass_rate * thrust]
    }

    /// Display-form planar dynamics `[rho', theta', v_rho', v_t', dm']`.
    pub fn planar_rhs(&self, s: &PlanarState, u: &Control) -> Result<[f64; 5]> {
        if !(s.rho > 0.0) {
            return Err(Error::domain(format!("planar dynamics need rho > 0, got {}", s.rho)));
        }
        self.check_mass(s.dm)?;
        let f = self.planar_solver_rhs(&s.coords(), u.alpha, u.thrust);
        Ok([f[0], s.v_t / s.rho, f[1], f[2], f[3]])
    }

    /// Spherical dynamics `[rho, theta, psi, v_rho, v_t, v_perp, dm]'`.
    pub fn spherical_rhs(&self, s: &SphericalState, u: &Control) -> Result<[f64; 7]> {
        let (sp, cp) = s.psi.sin_cos();
        if sp.abs() < 1e-12 {
            return Err(Error::domain("spherical dynamics are singular at the poles"));
        }
        if !(s.rho > 0.0) {
            return Err(Error::domain(format!("spherical dynamics need rho > 0, got {}", s.rho)));
        }
        self.check_mass(s.dm)?;
        let w = self.spin;
        let (rho, vr, vt, vp) = (s.rho, s.v_rho, s.v_t, s.v_perp);
        let cot = cp / sp;
        let a_rho = self.gravity_radial(rho) + w * w * rho * sp * sp + 2.0 * w * vt * sp + (vt * vt + vp * vp) / rho;
        let a_t = -2.0 * w * (vr * sp + vp * cp) - vr * vt / rho - vt * vp * cot / rho;
        let a_perp = w * w * rho * sp * cp + 2.0 * w * vt * cp - vr * vp / rho + vt * vt * cot / rho;
        let a = self.thrust_accel(u.thrust, s.dm);
        let (sa, ca) = u.alpha.sin_cos();
        let (sd, cd) = u.delta.sin_cos();
        Ok([
            vr,
            vt / (rho * sp),
            vp / rho,
            a_rho + a * ca,
            a_t + a * sa * sd,
            a_perp + a * sa * cd,
            -self.mass_rate * u.thrust,
        ])
    }

    /// Cartesian dynamics. The thrust angles are measured in the local
    /// spherical frame of the current position.
    pub fn cartesian_rhs(&self, c: &CartesianState, u: &Control) -> Result<[f64; 7]> {
        self.check_mass(c.dm)?;
        let [x, y, z] = c.position;
        let [vx, vy, vz] = c.velocity;
        let rho = (x * x + y * y + z * z).sqrt();
        if !(rho > 0.0) {
            return Err(Error::domain("cartesian dynamics need a nonzero radius"));
        }
        let g = self.gravity_radial(rho) / rho;
        let w = self.spin;
        let theta = y.atan2(x);
        let psi = (x * x + y * y).sqrt().atan2(z);
        let [er, et, ep] = spherical_basis(theta, psi);
        let a = self.thrust_accel(u.thrust, c.dm);
        let (sa, ca) = u.alpha.sin_cos();
        let (sd, cd) = u.delta.sin_cos();
        let mut thrust = [0.0; 3];
        for i in 0..3 {
            thrust[i] = a * (ca * er[i] + sa * sd * et[i] + sa * cd * ep[i]);
        }
        Ok([
            vx,
            vy,
            vz,
            g * x + w * w * x + 2.0 * w * vy + thrust[0],
            g * y + w * w * y - 2.0 * w * vx + thrust[1],
            g * z + thrust[2],
            -self.mass_rate * u.thrust,
        ])
    }

    /// Propagates the display-form planar state over `duration` under a constant
    /// control with the adaptive Dormand-Prince integrator.
    pub fn propagate_planar(&self, s: &PlanarState, u: &Control, duration: f64) -> Result<PlanarState> {
        self.planar_rhs(s, u)?;
        let end = integrate(
            |_, y: &[f64; 5]| {
                let st = PlanarState::from_vec(*y);
                let f = self.planar_solver_rhs(&st.coords(), u.alpha, u.thrust);
                [f[0], st.v_t / st.rho, f[1], f[2], f[3]]
            },
            s.to_vec(),
            duration,
            PROPAGATION_RTOL,
            PROPAGATION_ATOL,
        )?;
        Ok(PlanarState::from_vec(end))
    }

    pub fn propagate_cartesian(&self, c: &CartesianState, u: &Control, duration: f64, rtol: f64, atol: f64) -> Result<CartesianState> {
        self.cartesian_rhs(c, u)?;
        let end = integrate(
            |_, y: &[f64; 7]| {
                self.cartesian_rhs(&CartesianState::from_array(*y), u)
                    .unwrap_or([f64::NAN; 7])
            },
            c.to_array(),
            duration,
            rtol,
            atol,
        )?;
        Ok(CartesianState::from_array(end))
    }

    /// Cross-checks [`Self::spherical_rhs`] against the Cartesian dynamics:
    /// a short Cartesian arc through `c` is mapped to spherical coordinates and
    /// differentiated numerically (Richardson-extrapolated central
    /// differences). Returns the largest absolute deviation over all rows.
    pub fn spherical_from_cartesian_consistency(&self, c: &CartesianState, u: &Control) -> Result<f64> {
        let s0 = spherical_from_cartesian(c);
        if s0.psi.sin().abs() < 1e-6 {
            return Err(Error::domain("consistency check is undefined at the poles"));
        }
        let analytic = self.spherical_rhs(&s0, u)?;
        let h = 1e-3 * s0.rho / (s0.rho.abs() + dot(&c.velocity, &c.velocity).sqrt()).max(1e-12);
        let central = |h: f64| -> Result<[f64; 7]> {
            let fwd = spherical_from_cartesian(&self.propagate_cartesian(c, u, h, 1e-14, 1e-16)?).to_array();
            let bwd = spherical_from_cartesian(&self.propagate_cartesian(c, u, -h, 1e-14, 1e-16)?).to_array();
            let mut d = [0.0; 7];
            for i in 0..7 {
                let mut diff = fwd[i] - bwd[i];
                if i == 1 {
                    diff = wrap_angle(diff);
                }
                d[i] = diff / (2.0 * h);
            }
            Ok(d)
        };
        let d1 = central(h)?;
        let d2 = central(h / 2.0)?;
        let mut worst: f64 = 0.0;
        for i in 0..7 {
            let rich = (4.0 * d2[i] - d1[i]) / 3.0;
            worst = worst.max((rich - analytic[i]).abs());
        }
        Ok(worst)
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

struct FnSystem<F>(F);

impl<F, const N: usize> System<f64, SVector<f64, N>> for FnSystem<F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn system(&self, x: f64, y: &SVector<f64, N>, dy: &mut SVector<f64, N>) {
        let mut arr = [0.0; N];
        arr.copy_from_slice(y.as_slice());
        let out = (self.0)(x, &arr);
        dy.as_mut_slice().copy_from_slice(&out);
    }
}

/// Integrates `y' = f(t, y)` from `t = 0` to `t = duration` (which may be
/// negative) with the adaptive Dormand-Prince 5(4) pair.
pub fn integrate<F, const N: usize>(f: F, y0: [f64; N], duration: f64, rtol: f64, atol: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if duration == 0.0 {
        return Ok(y0);
    }
    let mut stepper = Dopri5::new(FnSystem(f), 0.0, duration, duration, SVector::<f64, N>::from(y0), rtol, atol);
    stepper.set_output(OutputType::Sparse);
    stepper.integrate().map_err(|e| Error::Integration(e.to_string()))?;
    let last = stepper
        .y_out()
        .last()
        .ok_or_else(|| Error::Integration("integrator produced no output".into()))?;
    let mut out = [0.0; N];
    out.copy_from_slice(last.as_slice());
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration("state became non-finite".into()));
    }
    Ok(out)
}

/// Sample of a reconstructed trajectory: time, display state, control.
pub trait ThetaSample {
    fn time(&self) -> f64;
    fn state(&self) -> &PlanarState;
    fn state_mut(&mut self) -> &mut PlanarState;
}

/// Fills `theta` by trapezoidal quadrature of `v_t / rho`, starting from the
/// `theta` already stored in the first sample.
pub fn reconstruct_theta<S: ThetaSample>(samples: &mut [S]) {
    for k in 1..samples.len() {
        let (head, tail) = samples.split_at_mut(k);
        let prev = &head[k - 1];
        let dt = tail[0].time() - prev.time();
        let p = prev.state();
        let c = tail[0].state();
        let rate = 0.5 * (p.v_t / p.rho + c.v_t / c.rho);
        let theta = p.theta + rate * dt;
        tail[0].state_mut().theta = theta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AsteroidParams, Normalization, SpacecraftParams};

    fn si_model(spin: f64, gm: f64) -> DynamicsModel {
        let sc = SpacecraftParams::new(750.0, 0.6, 4.0e4, 0.1).unwrap();
        let ast = AsteroidParams {
            gravitational_parameter: gm.max(1e-300),
            spin_rate: spin,
            semi_major_axis: 1.5907e11,
            mass: 1.4091e12,
            sun_mass: 1.989e30,
            rho_min: 1000.0,
            rho_max: 8740.0,
        };
        DynamicsModel::new(&sc, &ast, GravityModel::PointMass { gm }, &Normalization::identity(&sc))
    }

    #[test]
    fn coasting_nonrotating_is_pure_gravity() {
        let m = si_model(0.0, 94.0);
        let c = CartesianState {
            position: [3000.0, -4000.0, 1200.0],
            velocity: [0.0; 3],
            dm: 0.05,
        };
        let f = m.cartesian_rhs(&c, &Control::planar(1.3, 0.0)).unwrap();
        let r = (3000.0f64 * 3000.0 + 4000.0 * 4000.0 + 1200.0 * 1200.0).sqrt();
        let g = -94.0 / (r * r * r);
        assert_eq!(&f[..3], &[0.0, 0.0, 0.0]);
        for i in 0..3 {
            assert!((f[3 + i] - g * c.position[i]).abs() < 1e-18);
        }
        assert_eq!(f[6], 0.0);
    }

    #[test]
    fn full_thrust_mass_flow() {
        let m = si_model(4e-4, 94.0);
        let c = CartesianState {
            position: [5100.0, 0.0, 0.0],
            velocity: [0.0, -2.4, 0.0],
            dm: 0.1,
        };
        let f = m.cartesian_rhs(&c, &Control::planar(0.0, 1.0)).unwrap();
        assert!((f[6] + 1.5e-5).abs() < 1e-18);
    }

    #[test]
    fn coriolis_term() {
        let w = 4.2883e-4;
        let m = si_model(w, 0.0);
        let x = 5100.0;
        let vy = -2.4;
        let c = CartesianState {
            position: [x, 0.0, 0.0],
            velocity: [0.0, vy, 0.0],
            dm: 0.0,
        };
        let f = m.cartesian_rhs(&c, &Control::coast()).unwrap();
        assert!((f[3] - (w * w * x + 2.0 * w * vy)).abs() < 1e-15);
        assert!(f[4].abs() < 1e-18);
    }

    #[test]
    fn zero_total_mass_is_rejected() {
        let m = si_model(0.0, 94.0);
        let c = CartesianState {
            position: [5100.0, 0.0, 0.0],
            velocity: [0.0; 3],
            dm: -750.0,
        };
        assert!(m.cartesian_rhs(&c, &Control::coast()).is_err());
    }

    #[test]
    fn planar_no_thrust_no_burn() {
        let m = si_model(4e-4, 94.0);
        let s = PlanarState {
            rho: 5100.0,
            theta: 0.3,
            v_rho: 0.1,
            v_t: -2.3,
            dm: 0.05,
        };
        let f = m.planar_rhs(&s, &Control::planar(0.7, 0.0)).unwrap();
        assert_eq!(f[4], 0.0);
    }

    #[test]
    fn planar_radial_thrust_only_in_v_rho_row() {
        let m = si_model(4e-4, 94.0);
        let s = PlanarState {
            rho: 5100.0,
            theta: 0.0,
            v_rho: 0.1,
            v_t: -2.3,
            dm: 0.05,
        };
        let coast = m.planar_rhs(&s, &Control::coast()).unwrap();
        let burn = m.planar_rhs(&s, &Control::planar(0.0, 1.0)).unwrap();
        let expected = m.thrust_constant * m.dry_mass / (m.dry_mass + 0.05);
        assert!((burn[2] - coast[2] - expected).abs() < 1e-18);
        assert_eq!(burn[3], coast[3]);
        assert!((expected - 0.6 / 750.05).abs() < 1e-18);
    }

    #[test]
    fn planar_rejects_nonpositive_radius() {
        let m = si_model(0.0, 94.0);
        let s = PlanarState {
            rho: 0.0,
            ..Default::default()
        };
        assert!(m.planar_rhs(&s, &Control::coast()).is_err());
    }

    #[test]
    fn circular_orbit_balance() {
        let gm = 94.04;
        let m = si_model(0.0, gm);
        let rho = 5100.0;
        let s = PlanarState {
            rho,
            theta: 0.0,
            v_rho: 0.0,
            v_t: (gm / rho).sqrt(),
            dm: 0.0,
        };
        let f = m.planar_rhs(&s, &Control::coast()).unwrap();
        assert!(f[2].abs() < 1e-18, "{}", f[2]);
    }

    #[test]
    fn rotating_frame_circular_orbit_balance() {
        let gm = 94.04;
        let w = 4.2883e-4;
        let m = si_model(w, gm);
        let rho = 6117.5;
        for sign in [1.0, -1.0] {
            let s = PlanarState {
                rho,
                theta: 0.0,
                v_rho: 0.0,
                v_t: sign * (gm / rho).sqrt() - w * rho,
                dm: 0.0,
            };
            let f = m.planar_rhs(&s, &Control::coast()).unwrap();
            assert!(f[2].abs() < 1e-17, "{}", f[2]);
        }
    }

    #[test]
    fn equatorial_spherical_matches_planar() {
        let m = si_model(4.2883e-4, 94.0);
        let sph = SphericalState {
            rho: 5300.0,
            theta: 0.4,
            psi: FRAC_PI_2,
            v_rho: 0.3,
            v_t: -2.2,
            v_perp: 0.0,
            dm: 0.04,
        };
        let u = Control::planar(0.8, 0.6);
        let u3 = Control {
            alpha: 0.8,
            delta: FRAC_PI_2,
            thrust: 0.6,
        };
        let fs = m.spherical_rhs(&sph, &u3).unwrap();
        let planar = PlanarState {
            rho: sph.rho,
            theta: sph.theta,
            v_rho: sph.v_rho,
            v_t: sph.v_t,
            dm: sph.dm,
        };
        let fp = m.planar_rhs(&planar, &u).unwrap();
        let pairs = [(0, 0), (1, 1), (3, 2), (4, 3), (6, 4)];
        for (i, j) in pairs {
            assert!((fs[i] - fp[j]).abs() <= 1e-12 * fp[j].abs().max(1e-12), "row {i}: {} vs {}", fs[i], fp[j]);
        }
        assert!(fs[2].abs() < 1e-18);
        assert!(fs[5].abs() < 1e-15, "{}", fs[5]);
    }

    #[test]
    fn static_state_has_no_acceleration() {
        let m = si_model(0.0, 0.0);
        let sph = SphericalState {
            rho: 5000.0,
            theta: 1.0,
            psi: 1.1,
            dm: 0.0,
            ..Default::default()
        };
        let fs = m.spherical_rhs(&sph, &Control::coast()).unwrap();
        assert!(fs.iter().all(|v| v.abs() < 1e-18));
        let fc = m.cartesian_rhs(&cartesian_from_spherical(&sph), &Control::coast()).unwrap();
        assert!(fc.iter().all(|v| v.abs() < 1e-18));
    }

    #[test]
    fn spherical_rhs_rejects_poles() {
        let m = si_model(0.0, 94.0);
        let sph = SphericalState {
            rho: 5000.0,
            psi: 0.0,
            ..Default::default()
        };
        assert!(m.spherical_rhs(&sph, &Control::coast()).is_err());
    }

    #[test]
    fn coordinate_round_trip() {
        let s = SphericalState {
            rho: 1.1,
            theta: -2.0,
            psi: 0.7,
            v_rho: 0.3,
            v_t: -1.2,
            v_perp: 0.05,
            dm: 0.02,
        };
        let back = spherical_from_cartesian(&cartesian_from_spherical(&s));
        for (a, b) in s.to_array().iter().zip(back.to_array()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    struct Sample {
        t: f64,
        s: PlanarState,
    }

    impl ThetaSample for Sample {
        fn time(&self) -> f64 {
            self.t
        }
        fn state(&self) -> &PlanarState {
            &self.s
        }
        fn state_mut(&mut self) -> &mut PlanarState {
            &mut self.s
        }
    }

    fn samples(n: usize, dt: f64, rho: f64, v_t: f64) -> Vec<Sample> {
        (0..n)
            .map(|k| Sample {
                t: k as f64 * dt,
                s: PlanarState {
                    rho,
                    theta: if k == 0 { 0.25 } else { f64::NAN },
                    v_rho: 0.0,
                    v_t,
                    dm: 0.0,
                },
            })
            .collect()
    }

    #[test]
    fn theta_constant_without_tangential_velocity() {
        let mut s = samples(10, 0.1, 1.0, 0.0);
        reconstruct_theta(&mut s);
        assert!(s.iter().all(|x| x.s.theta == 0.25));
    }

    #[test]
    fn theta_constant_rate() {
        let mut s = samples(11, 0.1, 2.0, 0.5);
        reconstruct_theta(&mut s);
        let last = s.last().unwrap();
        assert!((last.s.theta - 0.25 - 0.25 * 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_on_circular_coast_matches_angular_rate() {
        let gm = 94.04;
        let rho = 5100.0;
        let m = si_model(0.0, gm);
        let v = (gm / rho).sqrt();
        let mut s = PlanarState {
            rho,
            theta: 0.0,
            v_rho: 0.0,
            v_t: v,
            dm: 0.0,
        };
        let dt = 200.0;
        let mut traj = vec![Sample { t: 0.0, s }];
        for k in 1..=50 {
            s = m.propagate_planar(&s, &Control::coast(), dt).unwrap();
            let mut copy = s;
            copy.theta = f64::NAN;
            traj.push(Sample { t: k as f64 * dt, s: copy });
        }
        reconstruct_theta(&mut traj);
        let expected = v / rho * 50.0 * dt;
        assert!((traj.last().unwrap().s.theta - expected).abs() < 1e-6);
        // propagated theta agrees too
        assert!((s.theta - expected).abs() < 1e-6);
    }

    #[test]
    fn tabulated_gravity_interpolates_and_clamps() {
        let g = GravityModel::tabulated(vec![1000.0, 2000.0, 4000.0], vec![-4.0, -1.0, -0.25]).unwrap();
        assert_eq!(g.radial_accel(500.0), -4.0);
        assert_eq!(g.radial_accel(1500.0), -2.5);
        assert_eq!(g.radial_accel(3000.0), -0.625);
        assert_eq!(g.radial_accel(9000.0), -0.25);
        assert!(g.is_attractive_on(1000.0, 4000.0));
        assert!(GravityModel::tabulated(vec![1.0, 1.0], vec![-1.0, -1.0]).is_err());
    }

    #[test]
    fn gravity_file_parses() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        std::fs::write(&p, "# rho accel\n1000 -1e-4\n2000, -2.5e-5\n\n").unwrap();
        let g = GravityModel::from_file(&p).unwrap();
        assert_eq!(g.radial_accel(1000.0), -1e-4);
        std::fs::write(&p, "1000 -1e-4 7\n").unwrap();
        assert!(GravityModel::from_file(&p).is_err());
    }
}
