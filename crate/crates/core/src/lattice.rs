//! Dense space-time fields on a uniform `(t, r)` lattice.

use alloc::vec::Vec;

use crate::fields::GridSpec1D;
use crate::{Error, Result};

/// Values `f(t_n, r_j)` with `t_n = t0 + n·dt` and `r_j` from `r_grid`,
/// stored row-major by time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    r_grid: GridSpec1D,
    t0: f64,
    dt: f64,
    levels: usize,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(r_grid: GridSpec1D, t0: f64, dt: f64, levels: usize, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(alloc::format!("time step must be positive, got {dt}")));
        }
        if levels == 0 || values.len() != levels * r_grid.count() {
            return Err(Error::InvalidInput(alloc::format!(
                "lattice shape {}x{} does not match {} values",
                levels,
                r_grid.count(),
                values.len()
            )));
        }
        Ok(Self { r_grid, t0, dt, levels, values })
    }

    pub fn from_fn(r_grid: GridSpec1D, t0: f64, dt: f64, levels: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(levels * r_grid.count());
        for n in 0..levels {
            let t = t0 + n as f64 * dt;
            values.extend(r_grid.coords().map(|r| f(t, r)));
        }
        Self::new(r_grid, t0, dt, levels, values)
    }

    pub fn r_grid(&self) -> &GridSpec1D {
        &self.r_grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.values[n * self.r_grid.count() + j]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.r_grid.count();
        &self.values[n * w..(n + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_shape(&self, other: &Field2D) -> bool {
        self.levels == other.levels
            && self.r_grid.count() == other.r_grid.count()
            && libm::fabs(self.dt - other.dt) <= 1e-12 * self.dt
            && libm::fabs(self.r_grid.spacing() - other.r_grid.spacing()) <= 1e-12 * self.r_grid.spacing()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(libm::fabs(v)))
    }
}
