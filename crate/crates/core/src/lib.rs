//! Constrained backward-reachability value functions for low-thrust transfers
//! around a rotating asteroid, with Pareto-front and trajectory extraction.

pub mod bolza;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod hjsolver;
pub mod io;
pub mod model;
pub mod pareto;
pub mod systems;
pub mod trajectory;

pub use dynamics::{Control, DynamicsModel, GravityModel, PlanarState};
pub use error::{Error, Result};
pub use grid::{Axis, GridSpec};
pub use hjsolver::{HamiltonianSystem, SolverSettings, ValueField};
pub use model::{AsteroidParams, ConstraintSet, Normalization, SpacecraftParams, TargetOrbit, TargetSet};
pub use bolza::BolzaSpec;
pub use config::Scenario;
pub use io::RunManifest;
pub use pareto::{ParetoResult, ScanSpec};
pub use trajectory::{ReconstructOptions, Reconstructor, Trajectory};
