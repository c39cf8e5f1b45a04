//! Fifth-order WENO one-sided derivatives for Hamilton-Jacobi equations.

use crate::grid::{GridSpec, GHOST_WIDTH};

/// Weighting variant. `Z` uses the global smoothness indicator of Borges et
/// al., which keeps fifth order near critical points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WenoVariant {
    Js,
    #[default]
    Z,
}

/// Combines five consecutive first differences (already divided by the
/// spacing), ordered away from the upwind side.
#[inline]
pub fn weno5(v1: f64, v2: f64, v3: f64, v4: f64, v5: f64, variant: WenoVariant) -> f64 {
    let p1 = v1 / 3.0 - 7.0 / 6.0 * v2 + 11.0 / 6.0 * v3;
    let p2 = -v2 / 6.0 + 5.0 / 6.0 * v3 + v4 / 3.0;
    let p3 = v3 / 3.0 + 5.0 / 6.0 * v4 - v5 / 6.0;

    let s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
    let s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
    let s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2) + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);

    let eps = 1e-6 * (v1 * v1).max(v2 * v2).max(v3 * v3).max(v4 * v4).max(v5 * v5) + 1e-99;

    let (a1, a2, a3) = match variant {
        WenoVariant::Js => (
            0.1 / (s1 + eps).powi(2),
            0.6 / (s2 + eps).powi(2),
            0.3 / (s3 + eps).powi(2),
        ),
        WenoVariant::Z => {
            let tau = (s1 - s3).abs();
            (
                0.1 * (1.0 + (tau / (s1 + eps)).powi(2)),
                0.6 * (1.0 + (tau / (s2 + eps)).powi(2)),
                0.3 * (1.0 + (tau / (s3 + eps)).powi(2)),
            )
        }
    };
    (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)
}

/// Left and right derivatives at the centre of a 7-point stencil
/// `phi[i-3..=i+3]` with spacing `dx`.
#[inline]
pub fn weno5_pair(s: &[f64; 7], dx: f64, variant: WenoVariant) -> (f64, f64) {
    let d = |a: usize| (s[a + 1] - s[a]) / dx;
    let minus = weno5(d(0), d(1), d(2), d(3), d(4), variant);
    let plus = weno5(d(5), d(4), d(3), d(2), d(1), variant);
    (minus, plus)
}

/// Gathers `phi[i-3..=i+3]` along one axis. Outside a non-periodic axis the
/// values are extrapolated linearly from the two boundary nodes.
#[inline]
pub fn gather_stencil(slice: &[f64], base: usize, i: usize, n: usize, stride: usize, periodic: bool, out: &mut [f64; 7]) {
    let origin = base - i * stride;
    let at = |j: usize| slice[origin + j * stride];
    let w = GHOST_WIDTH as isize;
    for (o, slot) in out.iter_mut().enumerate() {
        let j = i as isize + o as isize - w;
        *slot = if j >= 0 && (j as usize) < n {
            at(j as usize)
        } else if periodic {
            at(j.rem_euclid(n as isize) as usize)
        } else if j < 0 {
            let (a, b) = (at(0), at(1));
            a + j as f64 * (b - a)
        } else {
            let (a, b) = (at(n - 1), at(n - 2));
            a + (j - n as isize + 1) as f64 * (a - b)
        };
    }
}

/// Left and right WENO derivatives of `slice` along `dim` at every node.
pub fn weno5_derivatives(grid: &GridSpec, slice: &[f64], dim: usize, variant: WenoVariant) -> (Vec<f64>, Vec<f64>) {
    let strides = grid.strides();
    let axis = grid.axis(dim);
    let dx = axis.spacing();
    let mut idx = vec![0; grid.dim()];
    let mut st = [0.0; 7];
    let mut minus = Vec::with_capacity(slice.len());
    let mut plus = Vec::with_capacity(slice.len());
    for flat in 0..slice.len() {
        grid.unravel(flat, &mut idx);
        gather_stencil(slice, flat, idx[dim], axis.count, strides[dim], axis.periodic, &mut st);
        let (m, p) = weno5_pair(&st, dx, variant);
        minus.push(m);
        plus.push(p);
    }
    (minus, plus)
}
