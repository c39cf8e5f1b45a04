//! Multilinear-in-space, linear-in-time interpolation of a [`ValueField`].

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::hjsolver::ValueField;

/// Cell index and weight of `x` along `axis`; `None` when outside the hull.
/// Queries within `1e-9` cells of a node snap to it so nodes are reproduced exactly.
fn locate(axis: &Axis, x: f64, clamp: bool) -> Option<(usize, f64, bool)> {
    let dx = axis.spacing();
    let n = axis.count;
    let mut u = (x - axis.min) / dx;
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        u = r;
    }
    let mut clamped = false;
    if axis.periodic {
        u = u.rem_euclid(n as f64);
    } else if !(0.0..=(n - 1) as f64).contains(&u) {
        if !clamp || !u.is_finite() {
            return None;
        }
        u = u.clamp(0.0, (n - 1) as f64);
        clamped = true;
    }
    let upper = if axis.periodic { n - 1 } else { n - 2 };
    let i = (u.floor() as usize).min(upper);
    Some((i, u - i as f64, clamped))
}

/// Time bracket `(k, weight)` of horizon `t` among `stamps`.
fn locate_time(stamps: &[f64], t: f64, clamp: bool) -> Option<(usize, f64, bool)> {
    let last = stamps.len().checked_sub(1)?;
    if last == 0 {
        return (t == stamps[0] || clamp).then_some((0, 0.0, t != stamps[0]));
    }
    let (lo, hi) = (stamps[0], stamps[last]);
    let mut t = t;
    let slack = 1e-12 * (hi - lo);
    if (lo - slack..lo).contains(&t) || (hi..=hi + slack).contains(&t) {
        t = t.clamp(lo, hi);
    }
    let mut clamped = false;
    if !(lo..=hi).contains(&t) {
        if !clamp || !t.is_finite() {
            return None;
        }
        t = t.clamp(lo, hi);
        clamped = true;
    }
    let k = (stamps.partition_point(|&s| s <= t).max(1) - 1).min(last - 1);
    let w = (t - stamps[k]) / (stamps[k + 1] - stamps[k]);
    Some((k, w, clamped))
}

fn describe(x: &[f64], t: f64) -> String {
    let coords: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("x = [{}], t = {t:.6}", coords.join(", "))
}

fn eval(field: &ValueField, x: &[f64], t: f64, clamp: bool) -> Result<(f64, bool)> {
    let grid = field.grid();
    let d = grid.dim();
    if x.len() != d {
        return Err(Error::domain(format!("query has {} coordinates, field has {d}", x.len())));
    }
    let out = || Error::OutOfHull { coord: describe(x, t) };
    let (k, wt, mut clamped) = locate_time(field.stamps(), t, clamp).ok_or_else(out)?;
    let strides = grid.strides();
    let mut base = 0;
    let mut cells = [(0usize, 0.0f64, 0usize); 8];
    if d > cells.len() {
        return Err(Error::domain("interpolation supports at most 8 dimensions"));
    }
    for j in 0..d {
        let axis = grid.axis(j);
        let (i, w, c) = locate(axis, x[j], clamp).ok_or_else(out)?;
        clamped |= c;
        base += i * strides[j];
        // Offset to the upper neighbour (wraps on periodic axes).
        let step = if axis.periodic && i + 1 == axis.count {
            0usize.wrapping_sub(i * strides[j])
        } else {
            strides[j]
        };
        cells[j] = (i, w, step);
    }
    let slice_value = |slice: &[f32]| {
        let mut total = 0.0;
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut offset = base;
            for (j, &(_, w, step)) in cells.iter().enumerate().take(d) {
                if corner >> j & 1 == 1 {
                    weight *= w;
                    offset = offset.wrapping_add(step);
                } else {
                    weight *= 1.0 - w;
                }
            }
            if weight != 0.0 {
                total += weight * slice[offset] as f64;
            }
        }
        total
    };
    let v0 = slice_value(field.slice(k));
    let value = if wt == 0.0 {
        v0
    } else {
        let v1 = slice_value(field.slice(k + 1));
        if wt == 1.0 {
            v1
        } else {
            (1.0 - wt) * v0 + wt * v1
        }
    };
    Ok((value, clamped))
}

/// Interpolated value; errors outside the grid or stamp hull.
pub fn interpolate_value(field: &ValueField, x: &[f64], t: f64) -> Result<f64> {
    eval(field, x, t, false).map(|(v, _)| v)
}

/// Interpolated value with the query clamped into the hull; the flag reports clamping.
pub fn interpolate_value_clamped(field: &ValueField, x: &[f64], t: f64) -> Result<(f64, bool)> {
    eval(field, x, t, true)
}

/// Gradient estimate by central differences of the interpolant with step one
/// grid spacing. Returns the costate and whether any axis fell back to a
/// one-sided difference because the stencil left the hull.
pub fn estimate_costate(field: &ValueField, x: &[f64], t: f64) -> Result<(Vec<f64>, bool)> {
    let grid = field.grid();
    let center = interpolate_value(field, x, t)?;
    let mut q = vec![0.0; grid.dim()];
    let mut one_sided = false;
    let mut probe = x.to_vec();
    for k in 0..grid.dim() {
        let h = grid.spacing(k);
        probe[k] = x[k] + h;
        let plus = interpolate_value(field, &probe, t).ok();
        probe[k] = x[k] - h;
        let minus = interpolate_value(field, &probe, t).ok();
        probe[k] = x[k];
        q[k] = match (minus, plus) {
            (Some(m), Some(p)) => (p - m) / (2.0 * h),
            (None, Some(p)) => {
                one_sided = true;
                (p - center) / h
            }
            (Some(m), None) => {
                one_sided = true;
                (center - m) / h
            }
            (None, None) => {
                one_sided = true;
                0.0
            }
        };
    }
    Ok((q, one_sided))
}
