//! Physical parameters, the normalization scheme and the level-set encodings
//! of the state-constraint set `K` and the target set `C`.
//!
//! Solver coordinates are ordered `[rho, v_rho, v_t, dm]` (see [`idx`]) and are
//! always expressed in normalized units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newtonian constant of gravitation, m^3 / (kg s^2).
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674e-11;

/// Positions of the planar coordinates inside solver state vectors.
pub mod idx {
    pub const RHO: usize = 0;
    pub const V_RHO: usize = 1;
    pub const V_T: usize = 2;
    pub const DM: usize = 3;
    /// Auxiliary cost coordinate of Bolza runs.
    pub const Z: usize = 4;
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and > 0, got {value}")))
    }
}

/// Sphere-of-influence radius `a (M1/M2)^(2/5)`.
pub fn soi_radius(semi_major_axis: f64, body_mass: f64, primary_mass: f64) -> Result<f64> {
    require_positive("semi-major axis", semi_major_axis)?;
    require_positive("body mass", body_mass)?;
    require_positive("primary mass", primary_mass)?;
    Ok(semi_major_axis * (body_mass / primary_mass).powf(0.4))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftParams {
    pub dry_mass: f64,
    pub max_thrust: f64,
    pub exhaust_velocity: f64,
    pub max_propellant: f64,
}

impl SpacecraftParams {
    pub fn new(dry_mass: f64, max_thrust: f64, exhaust_velocity: f64, max_propellant: f64) -> Result<Self> {
        require_positive("dry mass", dry_mass)?;
        require_positive("max thrust", max_thrust)?;
        require_positive("exhaust velocity", exhaust_velocity)?;
        require_positive("max propellant", max_propellant)?;
        Ok(Self {
            dry_mass,
            max_thrust,
            exhaust_velocity,
            max_propellant,
        })
    }

    /// Burnout mass equals the dry mass.
    pub fn min_propellant(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsteroidParams {
    /// `GM`, m^3/s^2.
    pub gravitational_parameter: f64,
    /// Uniform rotation rate about the body z-axis, rad/s.
    pub spin_rate: f64,
    pub semi_major_axis: f64,
    pub mass: f64,
    pub sun_mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl AsteroidParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("gravitational parameter", self.gravitational_parameter)?;
        if !(self.spin_rate.is_finite() && self.spin_rate >= 0.0) {
            return Err(Error::domain(format!("spin rate must be >= 0, got {}", self.spin_rate)));
        }
        require_positive("rho_min", self.rho_min)?;
        require_positive("rho_max", self.rho_max)?;
        if self.rho_min >= self.rho_max {
            return Err(Error::domain(format!(
                "rho_min ({}) must be below rho_max ({})",
                self.rho_min, self.rho_max
            )));
        }
        Ok(())
    }

    /// SOI radius from the stored orbital data.
    pub fn soi(&self) -> Result<f64> {
        soi_radius(self.semi_major_axis, self.mass, self.sun_mass)
    }
}

/// Characteristic scales. Time is derived as `length / velocity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub length: f64,
    pub velocity: f64,
    pub mass: f64,
    /// Force scale, equal to the maximum thrust.
    pub force: f64,
    /// `T_max rho0 / (m0 v0^2)`: full-thrust acceleration of the dry spacecraft
    /// in normalized units.
    pub thrust_constant: f64,
}

impl Normalization {
    pub fn new(length: f64, velocity: f64, mass: f64, spacecraft: &SpacecraftParams) -> Result<Self> {
        require_positive("length scale", length)?;
        require_positive("velocity scale", velocity)?;
        require_positive("mass scale", mass)?;
        Ok(Self {
            length,
            velocity,
            mass,
            force: spacecraft.max_thrust,
            thrust_constant: spacecraft.max_thrust * length / (spacecraft.dry_mass * velocity * velocity),
        })
    }

    /// Scales that leave SI quantities untouched (thrust still in units of `T_max`).
    pub fn identity(spacecraft: &SpacecraftParams) -> Self {
        Self::new(1.0, 1.0, 1.0, spacecraft).expect("unit scales are valid")
    }

    pub fn time(&self) -> f64 {
        self.length / self.velocity
    }

    pub fn acceleration(&self) -> f64 {
        self.velocity * self.velocity / self.length
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length
    }
    pub fn length_from_si(&self, x: f64) -> f64 {
        x / self.length
    }
    pub fn velocity_to_si(&self, x: f64) -> f64 {
        x * self.velocity
    }
    pub fn velocity_from_si(&self, x: f64) -> f64 {
        x / self.velocity
    }
    pub fn time_to_si(&self, x: f64) -> f64 {
        x * self.time()
    }
    pub fn time_from_si(&self, x: f64) -> f64 {
        x / self.time()
    }
    pub fn mass_to_si(&self, x: f64) -> f64 {
        x * self.mass
    }
    pub fn mass_from_si(&self, x: f64) -> f64 {
        x / self.mass
    }
    pub fn force_to_si(&self, x: f64) -> f64 {
        x * self.force
    }
    pub fn force_from_si(&self, x: f64) -> f64 {
        x / self.force
    }

    /// `[rho, v_rho, v_t, dm]` from SI to normalized.
    pub fn coords_from_si(&self, si: [f64; 4]) -> [f64; 4] {
        [
            self.length_from_si(si[0]),
            self.velocity_from_si(si[1]),
            self.velocity_from_si(si[2]),
            self.mass_from_si(si[3]),
        ]
    }

    pub fn coords_to_si(&self, n: [f64; 4]) -> [f64; 4] {
        [
            self.length_to_si(n[0]),
            self.velocity_to_si(n[1]),
            self.velocity_to_si(n[2]),
            self.mass_to_si(n[3]),
        ]
    }
}

/// Target orbit in SI units with per-component half-widths of the target box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetOrbit {
    pub radius: f64,
    pub radial_velocity: f64,
    pub tangential_velocity: f64,
    /// Half-widths `[rho, v_rho, v_t]` of the target band.
    pub tolerance: [f64; 3],
}

impl TargetOrbit {
    pub fn validate(&self, asteroid: &AsteroidParams) -> Result<()> {
        if !(asteroid.rho_min..=asteroid.rho_max).contains(&self.radius) {
            return Err(Error::domain(format!(
                "target radius {} outside [{}, {}]",
                self.radius, asteroid.rho_min, asteroid.rho_max
            )));
        }
        for (name, w) in ["rho", "v_rho", "v_t"].iter().zip(self.tolerance) {
            require_positive(&format!("target tolerance ({name})"), w)?;
        }
        Ok(())
    }
}

/// `K` in normalized coordinates: radius band and propellant band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub rho_min: f64,
    pub rho_max: f64,
    pub dm_min: f64,
    pub dm_max: f64,
}

impl ConstraintSet {
    /// Lipschitz constant of [`ConstraintSet::g`] in the max-norm.
    pub const LIPSCHITZ: f64 = 1.0;

    /// Max of signed per-coordinate margins: `<= 0` exactly on `K`.
    pub fn g(&self, x: &[f64]) -> f64 {
        let rho = x[idx::RHO];
        let dm = x[idx::DM];
        (self.rho_min - rho)
            .max(rho - self.rho_max)
            .max(self.dm_min - dm)
            .max(dm - self.dm_max)
    }

    /// Direct interval test of membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        (self.rho_min..=self.rho_max).contains(&x[idx::RHO]) && (self.dm_min..=self.dm_max).contains(&x[idx::DM])
    }
}

/// `C` in normalized coordinates; the mass coordinate is unconstrained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    /// `[rho, v_rho, v_t]`.
    pub center: [f64; 3],
    pub half_width: [f64; 3],
}

impl TargetSet {
    pub const LIPSCHITZ: f64 = 1.0;

    pub fn nu(&self, x: &[f64]) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for k in 0..3 {
            m = m.max((x[k] - self.center[k]).abs() - self.half_width[k]);
        }
        m
    }

    /// Per-component absolute misses `[rho, v_rho, v_t]`.
    pub fn misses(&self, x: &[f64]) -> [f64; 3] {
        [
            (x[0] - self.center[0]).abs(),
            (x[1] - self.center[1]).abs(),
            (x[2] - self.center[2]).abs(),
        ]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..3).all(|k| (x[k] - self.center[k]).abs() <= self.half_width[k])
    }
}
