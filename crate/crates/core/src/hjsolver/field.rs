use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Time-stamped scalar field on a grid. Slices are stored in single precision
/// in stamp order; stamps are horizons (time-to-go) in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueField {
    grid: GridSpec,
    stamps: Vec<f64>,
    data: Vec<f32>,
}

impl ValueField {
    pub fn new(grid: GridSpec, stamps: Vec<f64>, data: Vec<f32>) -> Result<Self> {
        if stamps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("stamps must be strictly increasing".into()));
        }
        if stamps.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("stamps must be finite".into()));
        }
        if data.len() != grid.len() * stamps.len() {
            return Err(Error::Config(format!(
                "field data has {} values, expected {} x {}",
                data.len(),
                grid.len(),
                stamps.len()
            )));
        }
        Ok(Self { grid, stamps, data })
    }

    pub(crate) fn with_capacity(grid: GridSpec, stamps: usize) -> Self {
        let data = Vec::with_capacity(grid.len() * stamps);
        Self {
            grid,
            stamps: Vec::with_capacity(stamps),
            data,
        }
    }

    pub(crate) fn push(&mut self, stamp: f64, slice: &[f64]) {
        self.stamps.push(stamp);
        self.data.extend(slice.iter().map(|&v| v as f32));
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn stamps(&self) -> &[f64] {
        &self.stamps
    }

    pub fn slice(&self, k: usize) -> &[f32] {
        let n = self.grid.len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn slice_f64(&self, k: usize) -> Vec<f64> {
        self.slice(k).iter().map(|&v| v as f64).collect()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Bytes used by the slices.
    pub fn storage_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f32>()
    }

    pub fn max_horizon(&self) -> f64 {
        self.stamps.last().copied().unwrap_or(0.0)
    }
}
