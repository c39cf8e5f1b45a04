//! Scenario files: TOML with unit-suffixed keys, resolved into normalized
//! solver inputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{DynamicsModel, GravityModel};
use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::hjsolver::{uniform_stamps, SolverSettings, WenoVariant};
use crate::pareto::ScanSpec;
use crate::trajectory::ReconstructOptions;
use crate::model::{
    AsteroidParams, ConstraintSet, Normalization, SpacecraftParams, TargetOrbit, TargetSet, GRAVITATIONAL_CONSTANT,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub asteroid: AsteroidSection,
    pub spacecraft: SpacecraftSection,
    pub initial_orbit: InitialOrbitSection,
    pub target: TargetSection,
    pub normalization: NormalizationSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub pareto: ParetoSection,
    #[serde(default)]
    pub bolza: Option<BolzaSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsteroidSection {
    pub mass_kg: f64,
    /// Defaults to `G * mass_kg`.
    #[serde(default)]
    pub gravitational_parameter_m3ps2: Option<f64>,
    pub spin_rate_radps: f64,
    pub semi_major_axis_m: f64,
    pub sun_mass_kg: f64,
    pub rho_min_m: f64,
    /// Defaults to the sphere-of-influence radius.
    #[serde(default)]
    pub rho_max_m: Option<f64>,
    /// Two-column radial gravity table, relative to the scenario file.
    #[serde(default)]
    pub gravity_profile_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacecraftSection {
    pub dry_mass_kg: f64,
    pub max_thrust_newton: f64,
    pub exhaust_velocity_mps: f64,
    pub max_propellant_kg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialOrbitSection {
    pub radius_m: f64,
    #[serde(default)]
    pub radial_velocity_mps: f64,
    pub tangential_velocity_mps: f64,
    #[serde(default)]
    pub theta_rad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub radius_m: f64,
    #[serde(default)]
    pub radial_velocity_mps: f64,
    pub tangential_velocity_mps: f64,
    /// Half-widths of the target band; each defaults to one grid spacing.
    #[serde(default)]
    pub tolerance_radius_m: Option<f64>,
    #[serde(default)]
    pub tolerance_radial_velocity_mps: Option<f64>,
    #[serde(default)]
    pub tolerance_tangential_velocity_mps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSection {
    pub length_m: f64,
    pub velocity_mps: f64,
    #[serde(default = "one")]
    pub mass_kg: f64,
}

fn one() -> f64 {
    1.0
}

/// Axis bounds in normalized units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub min_normalized: f64,
    pub max_normalized: f64,
    pub points: usize,
}

impl AxisSection {
    fn axis(&self) -> Axis {
        Axis::new(self.min_normalized, self.max_normalized, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub rho: AxisSection,
    pub v_rho: AxisSection,
    pub v_t: AxisSection,
    pub dm: AxisSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub horizon_s: f64,
    pub stamps: usize,
    pub cfl: f64,
    /// Cap on the march step; defaults to the CFL step.
    pub max_step_s: Option<f64>,
    pub weno: WenoVariant,
    /// Forbid leaving the planar grid box instead of extrapolating past it.
    pub confine_to_grid: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            horizon_s: 4000.0,
            stamps: 101,
            cfl: 0.5,
            max_step_s: None,
            weno: WenoVariant::Z,
            confine_to_grid: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub steps: usize,
    pub smoothing_window: usize,
    /// Value slack for early-arrival steering; unset steers at the remaining horizon.
    pub horizon_tolerance: Option<f64>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            steps: 4000,
            smoothing_window: 21,
            horizon_tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParetoSection {
    pub tf_min_s: f64,
    pub tf_max_s: f64,
    pub tf_points: usize,
    /// Lattice points per scanned cost axis before bisection.
    pub scan_points: usize,
    /// Largest `|value|` accepted at refined boundary points.
    pub value_tolerance: f64,
    pub weak_dominance: bool,
}

impl Default for ParetoSection {
    fn default() -> Self {
        Self {
            tf_min_s: 0.0,
            tf_max_s: 4000.0,
            tf_points: 41,
            scan_points: 41,
            value_tolerance: 1e-3,
            weak_dominance: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BolzaObjective {
    RemainingPropellant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BolzaSection {
    pub objective: BolzaObjective,
    pub z: AxisSection,
    /// Initial propellant of the Bolza front scan.
    #[serde(default)]
    pub initial_propellant_kg: Option<f64>,
}

/// Initial orbit in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialOrbit {
    pub radius: f64,
    pub radial_velocity: f64,
    pub tangential_velocity: f64,
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySettings {
    pub steps: usize,
    pub smoothing_window: usize,
    pub horizon_tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BolzaSettings {
    pub objective: BolzaObjective,
    pub z_axis: Axis,
    pub initial_propellant: f64,
}

/// A fully resolved scenario. Grid, horizon and stamps are normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub spacecraft: SpacecraftParams,
    pub asteroid: AsteroidParams,
    pub gravity: GravityModel,
    pub normalization: Normalization,
    pub initial: InitialOrbit,
    pub target: TargetOrbit,
    pub grid: GridSpec,
    pub solver: SolverSettings,
    pub horizon: f64,
    pub stamp_count: usize,
    pub trajectory: TrajectorySettings,
    pub pareto: ParetoSection,
    pub bolza: Option<BolzaSettings>,
    /// SHA-256 of the parsed scenario file.
    pub hash: String,
}

impl Scenario {
    /// Reconstruction options carried by the `[trajectory]` section.
    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            steps: self.trajectory.steps,
            horizon_tolerance: self.trajectory.horizon_tolerance,
            ..Default::default()
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses TOML text; relative file references resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        Self::resolve(&file, base)
    }

    pub fn resolve(file: &ScenarioFile, base: &Path) -> Result<Self> {
        let cfg = |e: Error| match e {
            Error::Domain(m) | Error::Grid(m) => Error::Config(m),
            other => other,
        };
        let sc = &file.spacecraft;
        let spacecraft = SpacecraftParams::new(sc.dry_mass_kg, sc.max_thrust_newton, sc.exhaust_velocity_mps, sc.max_propellant_kg)
            .map_err(cfg)?;
        let a = &file.asteroid;
        let gm = a.gravitational_parameter_m3ps2.unwrap_or(GRAVITATIONAL_CONSTANT * a.mass_kg);
        let mut asteroid = AsteroidParams {
            gravitational_parameter: gm,
            spin_rate: a.spin_rate_radps,
            semi_major_axis: a.semi_major_axis_m,
            mass: a.mass_kg,
            sun_mass: a.sun_mass_kg,
            rho_min: a.rho_min_m,
            rho_max: 0.0,
        };
        asteroid.rho_max = match a.rho_max_m {
            Some(r) => r,
            None => asteroid.soi().map_err(cfg)?,
        };
        asteroid.validate().map_err(cfg)?;
        let gravity = match &a.gravity_profile_file {
            Some(p) => GravityModel::from_file(&base.join(p))?,
            None => GravityModel::PointMass { gm },
        };
        if !gravity.is_attractive_on(asteroid.rho_min, asteroid.rho_max) {
            return Err(Error::Config("gravity profile must be attractive on [rho_min, rho_max]".into()));
        }
        let n = &file.normalization;
        let normalization = Normalization::new(n.length_m, n.velocity_mps, n.mass_kg, &spacecraft).map_err(cfg)?;

        let g = &file.grid;
        let grid = GridSpec::new(vec![g.rho.axis(), g.v_rho.axis(), g.v_t.axis(), g.dm.axis()]).map_err(cfg)?;

        let io = &file.initial_orbit;
        let initial = InitialOrbit {
            radius: io.radius_m,
            radial_velocity: io.radial_velocity_mps,
            tangential_velocity: io.tangential_velocity_mps,
            theta: io.theta_rad,
        };
        if !(asteroid.rho_min..=asteroid.rho_max).contains(&initial.radius) {
            return Err(Error::Config(format!(
                "initial_orbit.radius_m = {} lies outside [rho_min, rho_max]",
                initial.radius
            )));
        }

        let t = &file.target;
        let tolerance = [
            t.tolerance_radius_m.unwrap_or(normalization.length_to_si(grid.spacing(0))),
            t.tolerance_radial_velocity_mps
                .unwrap_or(normalization.velocity_to_si(grid.spacing(1))),
            t.tolerance_tangential_velocity_mps
                .unwrap_or(normalization.velocity_to_si(grid.spacing(2))),
        ];
        let target = TargetOrbit {
            radius: t.radius_m,
            radial_velocity: t.radial_velocity_mps,
            tangential_velocity: t.tangential_velocity_mps,
            tolerance,
        };
        target.validate(&asteroid).map_err(cfg)?;

        let s = &file.solver;
        if !(s.horizon_s > 0.0) || s.stamps < 2 || !(s.cfl > 0.0) {
            return Err(Error::Config("solver needs horizon_s > 0, stamps >= 2 and cfl > 0".into()));
        }
        let horizon = normalization.time_from_si(s.horizon_s);
        let max_dt = match s.max_step_s {
            Some(v) if v > 0.0 => normalization.time_from_si(v),
            Some(_) => return Err(Error::Config("solver.max_step_s must be positive".into())),
            None => horizon,
        };
        let solver = SolverSettings {
            cfl: s.cfl,
            max_dt,
            weno: s.weno,
            confine: s.confine_to_grid,
        };
        if file.trajectory.horizon_tolerance.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::Config("trajectory.horizon_tolerance must be non-negative".into()));
        }
        if file.trajectory.steps == 0 || file.trajectory.smoothing_window % 2 == 0 {
            return Err(Error::Config("trajectory needs steps >= 1 and an odd smoothing_window".into()));
        }
        let p = &file.pareto;
        if !(p.tf_max_s >= p.tf_min_s && p.tf_min_s >= 0.0) || p.tf_points == 0 || p.scan_points < 2 {
            return Err(Error::Config("pareto needs 0 <= tf_min_s <= tf_max_s, tf_points >= 1, scan_points >= 2".into()));
        }
        let bolza = match &file.bolza {
            Some(b) => {
                let z_axis = b.z.axis();
                GridSpec::new(vec![z_axis]).map_err(cfg)?;
                Some(BolzaSettings {
                    objective: b.objective,
                    z_axis,
                    initial_propellant: b.initial_propellant_kg.unwrap_or(spacecraft.max_propellant),
                })
            }
            None => None,
        };
        let canonical = serde_json::to_vec(file).map_err(|e| Error::Config(e.to_string()))?;
        let hash = Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            spacecraft,
            asteroid,
            gravity,
            normalization,
            initial,
            target,
            grid,
            solver,
            horizon,
            stamp_count: s.stamps,
            trajectory: TrajectorySettings {
                steps: file.trajectory.steps,
                smoothing_window: file.trajectory.smoothing_window,
                horizon_tolerance: file.trajectory.horizon_tolerance,
            },
            pareto: p.clone(),
            bolza,
            hash,
        })
    }

    pub fn model(&self) -> DynamicsModel {
        DynamicsModel::new(&self.spacecraft, &self.asteroid, self.gravity.clone(), &self.normalization)
    }

    pub fn constraints(&self) -> ConstraintSet {
        let n = &self.normalization;
        ConstraintSet {
            rho_min: n.length_from_si(self.asteroid.rho_min),
            rho_max: n.length_from_si(self.asteroid.rho_max),
            dm_min: n.mass_from_si(self.spacecraft.min_propellant()),
            dm_max: n.mass_from_si(self.spacecraft.max_propellant),
        }
    }

    pub fn target_set(&self) -> TargetSet {
        let n = &self.normalization;
        let t = &self.target;
        TargetSet {
            center: [
                n.length_from_si(t.radius),
                n.velocity_from_si(t.radial_velocity),
                n.velocity_from_si(t.tangential_velocity),
            ],
            half_width: [
                n.length_from_si(t.tolerance[0]),
                n.velocity_from_si(t.tolerance[1]),
                n.velocity_from_si(t.tolerance[2]),
            ],
        }
    }

    /// Normalized solver coordinates of the initial orbit carrying `dm_kg` of propellant.
    pub fn initial_coords(&self, dm_kg: f64) -> [f64; 4] {
        let i = &self.initial;
        self.normalization
            .coords_from_si([i.radius, i.radial_velocity, i.tangential_velocity, dm_kg])
    }

    /// `[rho, v_rho, v_t]` of the initial orbit, normalized.
    pub fn initial_orbit(&self) -> [f64; 3] {
        let x = self.initial_coords(0.0);
        [x[0], x[1], x[2]]
    }

    fn scan(&self, scan_range: (f64, f64)) -> ScanSpec {
        let n = &self.normalization;
        let p = &self.pareto;
        ScanSpec {
            tf_min: n.time_from_si(p.tf_min_s).min(self.horizon),
            tf_max: n.time_from_si(p.tf_max_s).min(self.horizon),
            tf_points: p.tf_points,
            scan_points: p.scan_points,
            scan_range,
            value_tolerance: p.value_tolerance,
            weak_dominance: p.weak_dominance,
        }
    }

    /// Scan over initial propellant in `[m_min, m_max]`.
    pub fn mayer_scan(&self) -> ScanSpec {
        let k = self.constraints();
        self.scan((k.dm_min, k.dm_max))
    }

    /// Scan over the cost bound across the `z` axis.
    pub fn bolza_scan(&self) -> Option<ScanSpec> {
        self.bolza.as_ref().map(|b| self.scan((b.z_axis.min, b.z_axis.max)))
    }

    /// Start of the Bolza front: the initial orbit with the configured propellant.
    pub fn bolza_start(&self) -> Option<[f64; 4]> {
        self.bolza.as_ref().map(|b| self.initial_coords(b.initial_propellant))
    }

    pub fn stamps(&self) -> Vec<f64> {
        uniform_stamps(self.horizon, self.stamp_count)
    }

    /// Normalized view of the resolved scenario for display.
    pub fn summary(&self) -> String {
        let n = &self.normalization;
        let k = self.constraints();
        let c = self.target_set();
        let m = self.model();
        let x0 = self.initial_coords(self.spacecraft.max_propellant);
        let mut s = String::new();
        s.push_str(&format!("scenario_sha256 = \"{}\"\n", self.hash));
        s.push_str(&format!(
            "scales: length {} m, velocity {} m/s, time {} s, mass {} kg, force {} N\n",
            n.length,
            n.velocity,
            n.time(),
            n.mass,
            n.force
        ));
        s.push_str(&format!(
            "thrust_constant {:.6}, spin {:.6}, mass_rate {:.6e}, GM {:.6} m^3/s^2\n",
            n.thrust_constant, m.spin, m.mass_rate, self.asteroid.gravitational_parameter
        ));
        s.push_str(&format!(
            "K: rho in [{:.6}, {:.6}], dm in [{}, {}]\n",
            k.rho_min, k.rho_max, k.dm_min, k.dm_max
        ));
        s.push_str(&format!(
            "C: center [{:.6}, {:.6}, {:.6}], half-width [{:.6}, {:.6}, {:.6}]\n",
            c.center[0], c.center[1], c.center[2], c.half_width[0], c.half_width[1], c.half_width[2]
        ));
        s.push_str(&format!(
            "initial orbit (full tank): [{:.6}, {:.6}, {:.6}, {:.6}]\n",
            x0[0], x0[1], x0[2], x0[3]
        ));
        for (name, a) in ["rho", "v_rho", "v_t", "dm"].iter().zip(self.grid.axes()) {
            s.push_str(&format!(
                "grid {name}: [{}, {}] x {} (spacing {:.6})\n",
                a.min,
                a.max,
                a.count,
                a.spacing()
            ));
        }
        s.push_str(&format!(
            "horizon {:.6} ({} s), stamps {}, cfl {}\n",
            self.horizon,
            n.time_to_si(self.horizon),
            self.stamp_count,
            self.solver.cfl
        ));
        s
    }
}
