//! Pareto fronts of propellant against transfer time, with the value field as
//! the feasibility constraint.
//!
//! Fronts are found by a deterministic scan: for every transfer time on a
//! lattice the smallest feasible mass (or cost bound) is located on a lattice
//! and refined by bisection on the interpolated field, then the candidates are
//! filtered for non-dominance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hjsolver::ValueField;
use crate::model::idx;
use crate::trajectory::interpolate_value;

/// `true` when `a` dominates `b`: strictly smaller in every component, or with
/// `weak`, no larger anywhere and smaller somewhere.
pub fn dominates(a: &[f64], b: &[f64], weak: bool) -> bool {
    if weak {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    } else {
        a.iter().zip(b).all(|(x, y)| x < y)
    }
}

/// Indices of the points not dominated by any other point, ordered by the
/// first objective (ties keep input order).
pub fn nondominated_filter(points: &[Vec<f64>], weak: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    if points.iter().all(|p| p.len() == 2) {
        return sweep_2d(points, &order, weak);
    }
    order
        .into_iter()
        .filter(|&i| !points.iter().any(|p| dominates(p, &points[i], weak)))
        .collect()
}

/// Two objectives: a point survives unless an earlier group in first-objective
/// order has a smaller second objective (or, weakly, an equal first objective
/// with a smaller second one).
fn sweep_2d(points: &[Vec<f64>], order: &[usize], weak: bool) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut best_before = f64::INFINITY;
    let mut g = 0;
    while g < order.len() {
        let j1 = points[order[g]][0];
        let end = g + order[g..].iter().take_while(|&&i| points[i][0] == j1).count();
        let group = &order[g..end];
        let group_min = group.iter().map(|&i| points[i][1]).fold(f64::INFINITY, f64::min);
        for &i in group {
            let j2 = points[i][1];
            let dominated = if weak {
                best_before <= j2 || group_min < j2
            } else {
                best_before < j2
            };
            if !dominated {
                kept.push(i);
            }
        }
        best_before = best_before.min(group_min);
        g = end;
    }
    kept
}

/// `(omega_hat <= 0, omega_hat)` at `x` and horizon `t_f`.
pub fn feasible(field: &ValueField, x: &[f64], tf: f64) -> Result<(bool, f64)> {
    let v = interpolate_value(field, x, tf)?;
    Ok((v <= 0.0, v))
}

/// Scan lattice and refinement settings, all in normalized units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub tf_min: f64,
    pub tf_max: f64,
    pub tf_points: usize,
    /// Lattice size along the scanned mass or cost coordinate.
    pub scan_points: usize,
    /// Scanned coordinate range `[lo, hi]`.
    pub scan_range: (f64, f64),
    /// Boundary points are refined until `-tolerance <= value <= 0`.
    pub value_tolerance: f64,
    pub weak_dominance: bool,
}

impl ScanSpec {
    pub fn tf_values(&self) -> Vec<f64> {
        lattice(self.tf_min, self.tf_max, self.tf_points)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scan_range;
        if self.tf_points == 0 || self.scan_points == 0 || !(self.tf_max >= self.tf_min) || !(hi >= lo) {
            return Err(Error::Config("scan needs at least one point and ordered ranges".into()));
        }
        if !(self.value_tolerance > 0.0) {
            return Err(Error::Config("value tolerance must be positive".into()));
        }
        Ok(())
    }
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontKind {
    /// `J = (initial propellant, t_f)`.
    Mayer,
    /// `J = (z0, t_f)` at fixed initial propellant.
    Bolza,
}

/// One candidate in normalized units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    /// Initial planar state `[rho, v_rho, v_t, dm]`.
    pub start: [f64; 4],
    /// Auxiliary cost bound (Bolza only).
    pub z0: Option<f64>,
    pub tf: f64,
    pub value: f64,
    pub objectives: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    pub kind: FrontKind,
    pub scan: ScanSpec,
    pub candidates: Vec<ParetoPoint>,
    pub front: Vec<ParetoPoint>,
}

impl ParetoResult {
    fn from_candidates(kind: FrontKind, scan: ScanSpec, candidates: Vec<ParetoPoint>) -> Result<Self> {
        if candidates.is_empty() {
            let (lo, hi) = scan.scan_range;
            return Err(Error::EmptyFront(format!(
                "no feasible point for t_f in [{}, {}] ({} points), scanned coordinate in [{lo}, {hi}] ({} points)",
                scan.tf_min, scan.tf_max, scan.tf_points, scan.scan_points
            )));
        }
        let objectives: Vec<Vec<f64>> = candidates.iter().map(|c| c.objectives.to_vec()).collect();
        let front = nondominated_filter(&objectives, scan.weak_dominance)
            .into_iter()
            .map(|i| candidates[i].clone())
            .collect();
        Ok(Self {
            kind,
            scan,
            candidates,
            front,
        })
    }

    /// Front point with the smallest transfer time.
    pub fn min_time(&self) -> Option<&ParetoPoint> {
        self.front.iter().min_by(|a, b| a.tf.total_cmp(&b.tf))
    }

    /// Front point with the smallest first objective.
    pub fn min_cost(&self) -> Option<&ParetoPoint> {
        self.front.first()
    }
}

/// Bisection stops once the bracket is this fraction of the scan range.
pub const BISECTION_WIDTH: f64 = 1e-6;

/// Smallest `s` in the scan range with `value(s) <= 0`, assuming feasibility is
/// reached from below: lattice scan, then bisection on the first sign change.
fn boundary(value: impl Fn(f64) -> Result<f64>, scan: &ScanSpec) -> Result<Option<(f64, f64)>> {
    let (lo, hi) = scan.scan_range;
    let grid = lattice(lo, hi, scan.scan_points);
    let mut prev: Option<f64> = None;
    for &s in &grid {
        let v = value(s)?;
        if v <= 0.0 {
            let Some(mut a) = prev else {
                return Ok(Some((s, v)));
            };
            // value(a) > 0 >= value(b)
            let (mut b, mut vb) = (s, v);
            let width = BISECTION_WIDTH * (hi - lo).max(f64::MIN_POSITIVE);
            for _ in 0..200 {
                if b - a <= width && vb >= -scan.value_tolerance {
                    break;
                }
                let m = 0.5 * (a + b);
                let vm = value(m)?;
                if vm <= 0.0 {
                    (b, vb) = (m, vm);
                } else {
                    a = m;
                }
            }
            return Ok(Some((b, vb)));
        }
        prev = Some(s);
    }
    Ok(None)
}

/// Front of `(initial propellant, t_f)` for starts on the initial orbit
/// `orbit = [rho, v_rho, v_t]`.
pub fn mayer_front(field: &ValueField, orbit: [f64; 3], scan: ScanSpec) -> Result<ParetoResult> {
    scan.validate()?;
    if field.grid().dim() != 4 {
        return Err(Error::Grid("Mayer front needs a planar field".into()));
    }
    let start = |dm: f64| {
        let mut x = [0.0; 4];
        x[..3].copy_from_slice(&orbit);
        x[idx::DM] = dm;
        x
    };
    let rows: Vec<Option<ParetoPoint>> = scan
        .tf_values()
        .into_par_iter()
        .map(|tf| {
            let hit = boundary(|dm| interpolate_value(field, &start(dm), tf), &scan)?;
            Ok(hit.map(|(dm, value)| ParetoPoint {
                start: start(dm),
                z0: None,
                tf,
                value,
                objectives: [dm, tf],
            }))
        })
        .collect::<Result<_>>()?;
    ParetoResult::from_candidates(FrontKind::Mayer, scan, rows.into_iter().flatten().collect())
}

/// Front of `(z0, t_f)` for the fixed start `start`, on a field over
/// `[rho, v_rho, v_t, dm, z]`. The value is non-increasing in `z0`.
pub fn bolza_front(field: &ValueField, start: [f64; 4], scan: ScanSpec) -> Result<ParetoResult> {
    scan.validate()?;
    if field.grid().dim() != 5 {
        return Err(Error::Grid("Bolza front needs a field with one cost axis".into()));
    }
    let point = |z: f64| {
        let mut x = start.to_vec();
        x.push(z);
        x
    };
    let rows: Vec<Option<ParetoPoint>> = scan
        .tf_values()
        .into_par_iter()
        .map(|tf| {
            let hit = boundary(|z| interpolate_value(field, &point(z), tf), &scan)?;
            Ok(hit.map(|(z, value)| ParetoPoint {
                start,
                z0: Some(z),
                tf,
                value,
                objectives: [z, tf],
            }))
        })
        .collect::<Result<_>>()?;
    ParetoResult::from_candidates(FrontKind::Bolza, scan, rows.into_iter().flatten().collect())
}
