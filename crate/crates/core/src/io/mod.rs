//! Result files: value fields, CSV tables and run manifests.
//! Every emitted physical quantity is in SI units.

mod field_file;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use field_file::{parse_field, read_field, read_header, write_field, write_field_to, MAGIC};

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::hjsolver::{SolverSettings, ValueField};
use crate::model::Normalization;
use crate::pareto::ParetoResult;
use crate::trajectory::Trajectory;

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "s", "rho_m", "theta_rad", "vrho_mps", "vt_mps", "dm_kg", "alpha_rad", "thrust_N", "omega_hat",
];
pub const FRONT_HEADER: [&str; 3] = ["J1_kg", "J2_s", "omega_hat"];
pub const SET_HEADER: [&str; 6] = ["rho_m", "vrho_mps", "vt_mps", "dm_kg", "z_kg", "tf_s"];

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// One row per sample; `max_thrust` in newtons.
pub fn trajectory_csv(traj: &Trajectory, norm: &Normalization, max_thrust: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for s in &traj.samples {
        let x = norm.coords_to_si(s.state.coords());
        let row = [
            norm.time_to_si(s.time),
            x[0],
            s.state.theta,
            x[1],
            x[2],
            x[3],
            s.control.alpha,
            s.control.thrust * max_thrust,
            s.value,
        ];
        w.write_record(row.map(fmt)).map_err(csv_err)?;
    }
    finish(w)
}

/// `J1` in kilograms (initial propellant or cost bound), `J2 = t_f` in seconds.
pub fn front_csv(res: &ParetoResult, norm: &Normalization) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FRONT_HEADER).map_err(csv_err)?;
    for p in &res.front {
        let row = [norm.mass_to_si(p.objectives[0]), norm.time_to_si(p.objectives[1]), p.value];
        w.write_record(row.map(fmt)).map_err(csv_err)?;
    }
    finish(w)
}

/// Pareto set coordinates of the front members.
pub fn front_set_csv(res: &ParetoResult, norm: &Normalization) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SET_HEADER).map_err(csv_err)?;
    for p in &res.front {
        let x = norm.coords_to_si(p.start);
        let z = p.z0.map_or(String::new(), |z| fmt(norm.mass_to_si(z)));
        let mut row: Vec<String> = x.iter().map(|&v| fmt(v)).collect();
        row.push(z);
        row.push(fmt(norm.time_to_si(p.tf)));
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

/// Two whitespace-separated columns: `J1` in grams and `J2` in seconds.
pub fn front_plot_data(res: &ParetoResult, norm: &Normalization) -> String {
    let mut out = String::from("# J1_g J2_s\n");
    for p in &res.front {
        out.push_str(&format!(
            "{} {}\n",
            fmt(norm.mass_to_si(p.objectives[0]) * 1000.0),
            fmt(norm.time_to_si(p.objectives[1]))
        ));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Hex SHA-256 of a field's file image.
pub fn field_digest(field: &ValueField) -> String {
    let mut bytes = Vec::new();
    write_field_to(field, &mut bytes).expect("writing to memory cannot fail");
    hex_digest(&bytes)
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance written next to every produced field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario_hash: String,
    pub grid: Vec<Axis>,
    pub solver: SolverSettings,
    pub stamp_count: usize,
    pub horizon_s: f64,
    pub field_sha256: String,
    pub field_bytes: u64,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, scenario_hash: &str, field: &ValueField, solver: SolverSettings, horizon_s: f64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("reachxfer".to_owned(), env!("CARGO_PKG_VERSION").to_owned());
        versions.insert("format".to_owned(), "HJVF1".to_owned());
        Self {
            command: command.to_owned(),
            scenario_hash: scenario_hash.to_owned(),
            grid: field.grid().axes().to_vec(),
            solver,
            stamp_count: field.stamps().len(),
            horizon_s,
            field_sha256: field_digest(field),
            field_bytes: field.storage_bytes() as u64,
            timings: BTreeMap::new(),
            versions,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        write_text(path, &(text + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
