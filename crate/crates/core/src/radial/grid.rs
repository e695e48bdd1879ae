use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of intervals.
pub const MIN_INTERVALS: usize = 16;

/// Uniform grid `s_min = s_0 < s_1 < ... < s_n = s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    s_min: f64,
    s_max: f64,
    n: usize,
}

impl RadialGrid {
    pub fn new(s_min: f64, s_max: f64, n: usize) -> Result<Self> {
        if !(s_min.is_finite() && s_max.is_finite()) || s_min < 0.0 || s_max <= s_min {
            return Err(Error::Grid(format!("need s_max > s_min >= 0, got [{s_min}, {s_max}]")));
        }
        if n < MIN_INTERVALS {
            return Err(Error::Grid(format!("need at least {MIN_INTERVALS} intervals, got {n}")));
        }
        Ok(Self { s_min, s_max, n })
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Number of intervals; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.s_max - self.s_min) / self.n as f64
    }

    /// Node `i`; the last node is exactly `s_max`.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.s_max
        } else {
            self.s_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// True when the inner end is the regular center of a ball.
    pub fn has_center(&self) -> bool {
        self.s_min == 0.0
    }

    /// Same interval with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n: self.n * factor,
            ..*self
        }
    }
}

/// Samples of a function on a [`RadialGrid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.grid.n]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index and value of the smallest sample.
    pub fn argmin(&self) -> (usize, f64) {
        self.values.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, v)| if v < best.1 { (i, v) } else { best },
        )
    }

    /// Four-point Lagrange interpolation at `s`.
    pub fn interpolate(&self, s: f64) -> f64 {
        interpolate_uniform(self.grid.s_min, self.grid.spacing(), &self.values, s)
    }
}

/// Cubic Lagrange interpolation on uniformly spaced samples starting at `x0`.
pub(crate) fn interpolate_uniform(x0: f64, h: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 4);
    let t = (x - x0) / h;
    let i = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (t - (i + k) as f64) / (j as f64 - k as f64);
            }
        }
        acc += w * values[i + j];
    }
    acc
}
