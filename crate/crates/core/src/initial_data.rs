//! Graph data `(φ₀, φ₁)` → null-gauge data `(λ₀, ν₀, ψ₀, ψ₁)`.
//!
//! Gauge: `u = v = x/2` on the initial slice, so `r = x` there and
//! `g(∂_r, ∂_r) = e^ψ/2` must equal the induced `1 + φ₀'²`, giving
//! `ψ₀ = ln 2 + ln(1 + φ₀'²)`. The flat plane therefore has `ψ ≡ ln 2`.
//!
//! On the slice, with `W = 1 − φ_t² + φ_x²` and `S = 1 + φ_x²`, the
//! intrinsic time vector is `∂_t = (S e_T − φ_t φ_x e_x)/√W` in terms of the
//! graph tangents `e_T = (1, 0, φ_t)`, `e_x = (0, 1, φ_x)`, and
//! `∂_u = ∂_r + ∂_t`, `∂_v = ∂_r − ∂_t`. The second fundamental form in graph
//! coordinates is `φ_{μν}/√W` (normal `(φ_t, −φ_x, 1)/√W`), with `φ_tt`
//! eliminated through the minimal surface equation, and
//! `λ = k(∂_u, ∂_u)`, `ν = k(∂_v, ∂_v)`.
//!
//! `ψ₁` follows from `⟨∇_{∂_r} ∂_t, ∂_r⟩ = ¼ e^ψ ψ_t` and the slice identity
//! `⟨∂_x(∂_t), e_x⟩ = −⟨∂_t, ∂_x e_x⟩ = −φ_xx φ_t/√W`:
//! `ψ₁ = −2 φ_xx φ_t / (S √W)`.
//!
//! With these conventions a right-moving simple wave `f(x − t)` has
//! `λ₀ ≡ 0` and `ν₀ = 4 f''`.

use crate::fields::{derivative, GridSpec1D, SampledFunction1D};
use crate::{Error, Result};

/// Cauchy data `φ|_{t=0}`, `∂_t φ|_{t=0}` for the graph equation.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphData {
    phi0: SampledFunction1D,
    phi1: SampledFunction1D,
}

impl GraphData {
    pub fn new(phi0: SampledFunction1D, phi1: SampledFunction1D) -> Result<Self> {
        if phi0.grid() != phi1.grid() {
            return Err(Error::InvalidInput("phi0 and phi1 must share a grid".into()));
        }
        Ok(Self { phi0, phi1 })
    }

    pub fn phi0(&self) -> &SampledFunction1D {
        &self.phi0
    }

    pub fn phi1(&self) -> &SampledFunction1D {
        &self.phi1
    }

    pub fn grid(&self) -> &GridSpec1D {
        self.phi0.grid()
    }

    /// The data seen through `x ↦ −x` (grid mirrored about its midpoint).
    pub fn reflected(&self) -> Result<Self> {
        let g = *self.grid();
        let mirror = GridSpec1D::new(-g.end(), g.spacing(), g.count())?;
        let flip = |f: &SampledFunction1D| {
            let mut v = f.values().to_vec();
            v.reverse();
            SampledFunction1D::new(mirror, v)
        };
        Self::new(flip(&self.phi0)?, flip(&self.phi1)?)
    }
}

/// Cauchy data for the transport + ψ-wave system on a common `r` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricData {
    pub lambda0: SampledFunction1D,
    pub nu0: SampledFunction1D,
    pub psi0: SampledFunction1D,
    pub psi1: SampledFunction1D,
}

impl GeometricData {
    pub fn new(
        lambda0: SampledFunction1D,
        nu0: SampledFunction1D,
        psi0: SampledFunction1D,
        psi1: SampledFunction1D,
    ) -> Result<Self> {
        let g = lambda0.grid();
        if nu0.grid() != g || psi0.grid() != g || psi1.grid() != g {
            return Err(Error::InvalidInput("geometric data must share one grid".into()));
        }
        Ok(Self { lambda0, nu0, psi0, psi1 })
    }

    pub fn zeros(grid: GridSpec1D) -> Self {
        let z = SampledFunction1D::zeros(grid);
        Self { lambda0: z.clone(), nu0: z.clone(), psi0: z.clone(), psi1: z }
    }

    pub fn grid(&self) -> &GridSpec1D {
        self.lambda0.grid()
    }
}

/// `Λ(u)` and `V(v)`: the transported null components of the second
/// fundamental form. `λ(t, r) = Λ((r+t)/2)` and `ν(t, r) = V((r−t)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullPair {
    lambda: SampledFunction1D,
    nu: SampledFunction1D,
}

impl NullPair {
    pub fn new(lambda: SampledFunction1D, nu: SampledFunction1D) -> Self {
        Self { lambda, nu }
    }

    /// `Λ` sampled over `u`.
    pub fn lambda(&self) -> &SampledFunction1D {
        &self.lambda
    }

    /// `V` sampled over `v`.
    pub fn nu(&self) -> &SampledFunction1D {
        &self.nu
    }

    pub fn lambda_at_u(&self, u: f64) -> Option<f64> {
        self.lambda.interpolate(u)
    }

    pub fn nu_at_v(&self, v: f64) -> Option<f64> {
        self.nu.interpolate(v)
    }

    pub fn lambda_at(&self, t: f64, r: f64) -> Option<f64> {
        self.lambda_at_u(0.5 * (r + t))
    }

    pub fn nu_at(&self, t: f64, r: f64) -> Option<f64> {
        self.nu_at_v(0.5 * (r - t))
    }

    /// `λν` at `(t, r)`; exactly zero wherever either factor is.
    pub fn source_at(&self, t: f64, r: f64) -> Option<f64> {
        let l = self.lambda_at(t, r)?;
        if l == 0.0 {
            return Some(0.0);
        }
        Some(l * self.nu_at(t, r)?)
    }
}

fn radicand(phi_t: f64, phi_x: f64) -> f64 {
    1.0 - phi_t * phi_t + phi_x * phi_x
}

/// Minimum over nodes of `1 − φ₁² + φ₀'²`; errors if it is not positive.
pub fn validate_timelike(g: &GraphData) -> Result<f64> {
    let p = derivative(g.phi0())?;
    let mut min = f64::INFINITY;
    for (i, (&q, &px)) in g.phi1().values().iter().zip(p.values()).enumerate() {
        let w = radicand(q, px);
        if !(w > 0.0) {
            return Err(Error::NotTimelike { x: g.grid().coord(i), t: 0.0, radicand: w });
        }
        min = min.min(w);
    }
    Ok(min)
}

/// Convert graph Cauchy data to null-gauge data (gauge in the module docs).
///
/// Second derivatives are formed as the first-derivative stencil applied
/// to first derivatives, so `φ_xx` and `φ_tx` share one stencil and
/// discretely consistent simple waves convert to an exactly vanishing
/// `λ₀` or `ν₀`.
pub fn graph_to_geometric(g: &GraphData) -> Result<GeometricData> {
    if g.grid().count() < 5 {
        return Err(Error::InvalidInput(alloc::format!("graph data needs at least 5 nodes, got {}", g.grid().count())));
    }
    validate_timelike(g)?;
    let grid = *g.grid();
    let px = derivative(g.phi0())?;
    let pxx = derivative(&px)?;
    let q = g.phi1();
    let qx = derivative(q)?;

    let n = grid.count();
    let mut lambda = alloc::vec::Vec::with_capacity(n);
    let mut nu = alloc::vec::Vec::with_capacity(n);
    let mut psi0 = alloc::vec::Vec::with_capacity(n);
    let mut psi1 = alloc::vec::Vec::with_capacity(n);
    for i in 0..n {
        let (p, pxx, q, qx) = (px.values()[i], pxx.values()[i], q.values()[i], qx.values()[i]);
        let s = 1.0 + p * p;
        let sw = libm::sqrt(radicand(q, p));
        let phi_tt = (2.0 * q * p * qx + (1.0 - q * q) * pxx) / s;
        let (k_tt_graph, k_tx, k_xx) = (phi_tt / sw, qx / sw, pxx / sw);
        // ∂_t = a e_T + b e_x
        let a = s / sw;
        let b = -q * p / sw;
        let k_rr = k_xx;
        let k_rt = a * k_tx + b * k_xx;
        let k_tt = a * a * k_tt_graph + 2.0 * a * b * k_tx + b * b * k_xx;
        lambda.push(k_rr + 2.0 * k_rt + k_tt);
        nu.push(k_rr - 2.0 * k_rt + k_tt);
        psi0.push(libm::log(2.0 * s));
        psi1.push(-2.0 * pxx * q / (s * sw));
    }
    GeometricData::new(
        SampledFunction1D::new(grid, lambda)?,
        SampledFunction1D::new(grid, nu)?,
        SampledFunction1D::new(grid, psi0)?,
        SampledFunction1D::new(grid, psi1)?,
    )
}

/// `Λ(c) = λ₀(2c)`, `V(c) = ν₀(2c)`: the line `u = c` meets the slice at
/// `x = 2c`.
pub fn transport_profiles(gd: &GeometricData) -> NullPair {
    let half = gd.grid().scaled(0.5);
    // Same sample values, reinterpreted on the half-scaled grid.
    let relabel = |f: &SampledFunction1D| f.with_grid(half).expect("grid sizes agree");
    NullPair::new(relabel(&gd.lambda0), relabel(&gd.nu0))
}
