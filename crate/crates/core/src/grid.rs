//! Uniform rectangular grids stored row-major (last dimension fastest).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ghost layer width required by the fifth-order stencils.
pub const GHOST_WIDTH: usize = 3;
/// Minimum number of nodes per dimension.
pub const MIN_POINTS: usize = 2 * GHOST_WIDTH + 1;

/// One grid dimension. Nodes sit at `min + i * spacing` for `i < count`.
/// A periodic axis wraps with period `count * spacing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            periodic: false,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn period(&self) -> f64 {
        self.count as f64 * self.spacing()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        Self::with_min_points(axes, MIN_POINTS)
    }

    /// Grid without the stencil size requirement (for stored fields and
    /// interpolation only).
    pub fn for_storage(axes: Vec<Axis>) -> Result<Self> {
        Self::with_min_points(axes, 2)
    }

    fn with_min_points(axes: Vec<Axis>, min_points: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Grid("grid needs at least one dimension".into()));
        }
        for (k, a) in axes.iter().enumerate() {
            if !a.min.is_finite() || !a.max.is_finite() || !(a.max > a.min) {
                return Err(Error::Grid(format!("dimension {k}: need finite min < max, got [{}, {}]", a.min, a.max)));
            }
            if a.count < min_points {
                return Err(Error::Grid(format!(
                    "dimension {k}: {} points, at least {min_points} required",
                    a.count
                )));
            }
        }
        let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.count));
        if total.is_none() {
            return Err(Error::Grid("grid size overflows".into()));
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn spacing(&self, k: usize) -> f64 {
        self.axes[k].spacing()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::spacing).collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(0.0, f64::max)
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.min, a.max)).collect()
    }

    /// Flat-index strides (last dimension has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].count;
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].count;
            out[k] = flat % n;
            flat /= n;
        }
    }

    /// Coordinates of the node with flat index `flat`.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        for k in 0..self.dim() {
            out[k] = self.axes[k].coord(idx[k]);
        }
    }

    pub fn node_vec(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.node(flat, &mut x);
        x
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len())
            .map(|i| {
                self.node(i, &mut x);
                f(&x)
            })
            .collect()
    }

    /// Same axes with every count multiplied by `factor` intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis {
                count: (a.count - 1) * factor + 1,
                ..*a
            })
            .collect();
        GridSpec::new(axes)
    }

    /// True when `x` lies within the box (periodic axes always contain `x`).
    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(x)
            .all(|(a, &v)| a.periodic || (a.min..=a.max).contains(&v))
    }

    /// Nearest point of the box (periodic axes are left alone).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(x)
            .map(|(a, &v)| if a.periodic { v } else { v.clamp(a.min, a.max) })
            .collect()
    }
}
