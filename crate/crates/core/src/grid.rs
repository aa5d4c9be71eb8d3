//! One-dimensional parameter grids and argmax bookkeeping for scans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count, scale: GridScale::Linear }
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count, scale: GridScale::Log }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidGrid("count must be at least 1".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.count > 1 && self.start == self.stop {
            return Err(Error::InvalidGrid("start equals stop for a multi-point grid".into()));
        }
        if self.scale == GridScale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::InvalidGrid("log grids need positive bounds".into()));
        }
        Ok(())
    }

    /// Grid points, endpoints included. Log grids are geometric.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let last = (self.count - 1) as f64;
        let pts = match self.scale {
            GridScale::Linear => (0..self.count)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / last)
                .collect(),
            GridScale::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..self.count).map(|k| (a + (b - a) * k as f64 / last).exp()).collect()
            }
        };
        Ok(pts)
    }
}

/// Location of the maximum of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMaximum {
    pub index: usize,
    pub position: f64,
    pub value: f64,
    /// Larger of the two grid spacings adjacent to the maximum.
    pub resolution: f64,
}

/// Interior maximum of `values` sampled on `grid`; a maximum on either end is
/// reported as [`Error::GridTooCoarse`].
pub fn interior_maximum(grid: &[f64], values: &[f64]) -> Result<GridMaximum> {
    if grid.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
    }
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least three points to locate a maximum".into()));
    }
    let index = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    if index == 0 || index == grid.len() - 1 {
        return Err(Error::GridTooCoarse { index, len: grid.len(), value: grid[index] });
    }
    let resolution = (grid[index] - grid[index - 1]).abs().max((grid[index + 1] - grid[index]).abs());
    Ok(GridMaximum { index, position: grid[index], value: values[index], resolution })
}

/// Index of the grid point closest to `x`.
pub fn nearest_index(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
