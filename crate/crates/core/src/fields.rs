//! Uniform-grid sampled functions of one variable.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Uniform grid `x_i = origin + i·spacing`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec1D {
    origin: f64,
    spacing: f64,
    count: usize,
}

impl GridSpec1D {
    pub fn new(origin: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("grid spacing must be positive and finite, got {spacing}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidInput("grid origin must be finite".into()));
        }
        if count < 2 {
            return Err(Error::InvalidInput(alloc::format!("grid needs at least 2 nodes, got {count}")));
        }
        Ok(Self { origin, spacing, count })
    }

    /// Grid with step `spacing` running from `lo` to (approximately) `hi`.
    ///
    /// The node count is rounded, so `hi` is hit exactly whenever
    /// `(hi - lo) / spacing` is an integer.
    pub fn covering(lo: f64, hi: f64, spacing: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidInput(alloc::format!("empty interval [{lo}, {hi}]")));
        }
        let n = libm::round((hi - lo) / spacing) as usize + 1;
        Self::new(lo, spacing, n)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn end(&self) -> f64 {
        self.coord(self.count - 1)
    }

    /// Fractional index of `x`.
    pub fn position(&self, x: f64) -> f64 {
        (x - self.origin) / self.spacing
    }

    /// Index of the node at `x`, if `x` sits on a node (to `1e-9` of a cell).
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let p = self.position(x);
        let k = libm::round(p);
        if libm::fabs(p - k) <= NODE_SNAP && k >= 0.0 && (k as usize) < self.count {
            Some(k as usize)
        } else {
            None
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let p = self.position(x);
        p >= -NODE_SNAP && p <= (self.count - 1) as f64 + NODE_SNAP
    }

    /// The same extent and origin scaled by `factor` (used for `u = r/2`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self { origin: self.origin * factor, spacing: self.spacing * factor, count: self.count }
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.coord(i))
    }
}

const NODE_SNAP: f64 = 1e-9;

/// Samples of a real function on a [`GridSpec1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction1D {
    grid: GridSpec1D,
    values: Vec<f64>,
}

impl SampledFunction1D {
    pub fn new(grid: GridSpec1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidInput(alloc::format!("expected {} samples, got {}", grid.count(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!("non-finite sample at x = {}", grid.coord(i))));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.coords().map(f).collect())
    }

    pub fn zeros(grid: GridSpec1D) -> Self {
        Self { grid, values: alloc::vec![0.0; grid.count()] }
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Same values reinterpreted on another grid with the same node count.
    pub fn with_grid(&self, grid: GridSpec1D) -> Result<Self> {
        Self::new(grid, self.values.clone())
    }

    /// Local cubic Lagrange interpolation; exact at nodes. `None` outside
    /// the sampled interval.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        if !self.grid.contains(x) {
            return None;
        }
        if let Some(k) = self.grid.node_index(x) {
            return Some(self.values[k]);
        }
        let n = self.values.len();
        let p = self.grid.position(x).clamp(0.0, (n - 1) as f64);
        if n < 4 {
            let i = (libm::floor(p) as usize).min(n - 2);
            let s = p - i as f64;
            return Some(self.values[i] * (1.0 - s) + self.values[i + 1] * s);
        }
        let i = libm::floor(p) as usize;
        let start = i.saturating_sub(1).min(n - 4);
        let s = p - start as f64;
        let f = &self.values[start..start + 4];
        // Lagrange basis on nodes 0,1,2,3.
        let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        Some(f[0] * l0 + f[1] * l1 + f[2] * l2 + f[3] * l3)
    }

    /// Running trapezoidal integral `∫_{origin}^{x_i} f`, one entry per node.
    pub fn cumulative_integral(&self) -> Self {
        let h = self.grid.spacing();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        Self { grid: self.grid, values: out }
    }

    /// Smallest closed interval outside of which every sample is exactly 0.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|&v| v != 0.0)?;
        let last = self.values.iter().rposition(|&v| v != 0.0)?;
        Some((self.grid.coord(first), self.grid.coord(last)))
    }
}

fn require_nodes(f: &SampledFunction1D, min: usize) -> Result<()> {
    if f.len() < min {
        return Err(Error::InvalidInput(alloc::format!(
            "need at least {min} samples for this stencil, got {}",
            f.len()
        )));
    }
    Ok(())
}

/// First derivative: centered differences inside, second-order one-sided
/// stencils at both ends.
pub fn derivative(f: &SampledFunction1D) -> Result<SampledFunction1D> {
    require_nodes(f, 3)?;
    let v = f.values();
    let n = v.len();
    let h = f.grid().spacing();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
    for i in 1..n - 1 {
        d.push((v[i + 1] - v[i - 1]) / (2.0 * h));
    }
    d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h));
    SampledFunction1D::new(*f.grid(), d)
}

/// Second derivative, second order everywhere (four-point one-sided ends).
pub fn second_derivative(f: &SampledFunction1D) -> Result<SampledFunction1D> {
    require_nodes(f, 4)?;
    let v = f.values();
    let n = v.len();
    let h2 = f.grid().spacing() * f.grid().spacing();
    let mut d = Vec::with_capacity(n);
    d.push((2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2);
    for i in 1..n - 1 {
        d.push((v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2);
    }
    d.push((2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2);
    SampledFunction1D::new(*f.grid(), d)
}

/// Trapezoidal `∫|f| dx` over the grid extent.
pub fn norm_l1(f: &SampledFunction1D) -> f64 {
    let h = f.grid().spacing();
    f.values().windows(2).map(|w| 0.5 * h * (libm::fabs(w[0]) + libm::fabs(w[1]))).sum()
}

pub fn norm_linf(f: &SampledFunction1D) -> f64 {
    f.values().iter().fold(0.0, |m, &v| m.max(libm::fabs(v)))
}

/// `‖f‖₁ + ‖f'‖₁`.
pub fn norm_w11(f: &SampledFunction1D) -> Result<f64> {
    Ok(norm_l1(f) + norm_l1(&derivative(f)?))
}

/// Analytic profile used to build scenario data.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `a·exp(−(x−c)²/(2σ²))`
    Gaussian {
        amplitude: f64,
        center: f64,
        sigma: f64,
    },
    /// `d/dx` of the Gaussian with the same parameters.
    GaussianDerivative {
        amplitude: f64,
        center: f64,
        sigma: f64,
    },
    /// Gaussian times the smooth cutoff `exp(1 − 1/(1−s²))`, where `s` maps
    /// `[lo, hi]` onto `[−1, 1]`; identically zero outside `(lo, hi)`.
    CompactBump {
        amplitude: f64,
        center: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
    },
    /// Samples read from elsewhere, interpolated; zero outside the table.
    Tabulated(SampledFunction1D),
}

impl Profile {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Self {
        Profile::Gaussian { amplitude, center: 0.0, sigma }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        match self {
            Profile::Zero | Profile::Tabulated(_) => Ok(()),
            Profile::Constant { value } if !value.is_finite() => bad("constant must be finite"),
            Profile::Constant { .. } => Ok(()),
            Profile::Gaussian { amplitude, center, sigma }
            | Profile::GaussianDerivative { amplitude, center, sigma } => {
                if !(*sigma > 0.0) || !amplitude.is_finite() || !center.is_finite() {
                    bad("gaussian needs finite amplitude/center and sigma > 0")
                } else {
                    Ok(())
                }
            }
            Profile::CompactBump { amplitude, center, sigma, lo, hi } => {
                if !(*sigma > 0.0) || !amplitude.is_finite() || !center.is_finite() {
                    bad("compact-bump needs finite amplitude/center and sigma > 0")
                } else if !(hi > lo) {
                    bad("compact-bump support must satisfy lo < hi")
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Gaussian { amplitude, center, sigma } => {
                let z = (x - center) / sigma;
                amplitude * libm::exp(-0.5 * z * z)
            }
            Profile::GaussianDerivative { amplitude, center, sigma } => {
                let z = (x - center) / sigma;
                -amplitude * z / sigma * libm::exp(-0.5 * z * z)
            }
            Profile::CompactBump { amplitude, center, sigma, lo, hi } => {
                let s = (2.0 * x - lo - hi) / (hi - lo);
                if libm::fabs(s) >= 1.0 {
                    return 0.0;
                }
                let z = (x - center) / sigma;
                amplitude * libm::exp(-0.5 * z * z) * libm::exp(1.0 - 1.0 / (1.0 - s * s))
            }
            Profile::Tabulated(f) => f.interpolate(x).unwrap_or(0.0),
        }
    }
}

/// Evaluate `profile` at every node of `grid`.
pub fn sample(profile: &Profile, grid: GridSpec1D) -> Result<SampledFunction1D> {
    profile.validate()?;
    SampledFunction1D::from_fn(grid, |x| profile.eval(x))
}
