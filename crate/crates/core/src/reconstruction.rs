//! Rebuilding the immersion `X: M → ℝ^{1,2}` from null-gauge data.
//!
//! Along the initial slice `u = v = s` (so `r = 2s`) the adapted frame
//! obeys the Gauss and Weingarten equations
//!
//! ```text
//! X'   = X_u + X_v
//! X_u' = ψ_u X_u + λ n
//! X_v' = ψ_v X_v + ν n
//! n'   = −e^{−ψ} (λ X_v + ν X_u)
//! ```
//!
//! with `' = d/ds = ∂_u + ∂_v`, `ψ_u = ψ₀' + ψ₁`, `ψ_v = ψ₀' − ψ₁`. Since
//! `X_uv = 0`, `X_u` depends on `u` only and `X_v` on `v` only, so the whole
//! surface is `X(u, v) = X(s₀, s₀) + ∫_{s₀}^u X_u + ∫_{s₀}^v X_v`.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::diagnostics::DiagnosticsReport;
use crate::evolution::Evolution;
use crate::fields::{derivative, GridSpec1D, SampledFunction1D};
use crate::initial_data::{GeometricData, GraphData, NullPair};
use crate::{Error, Result};

/// A vector in `ℝ^{1,2}` with `⟨a, b⟩ = −a⁰b⁰ + a¹b¹ + a²b²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmbientVector(pub [f64; 3]);

impl AmbientVector {
    pub const fn new(x0: f64, x1: f64, x2: f64) -> Self {
        Self([x0, x1, x2])
    }

    pub fn dot(&self, o: &Self) -> f64 {
        let (a, b) = (self.0, o.0);
        -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// The vector `N` with `⟨N, c⟩ = det(a, b, c)`; orthogonal to `a` and `b`.
    pub fn cross(&self, o: &Self) -> Self {
        let (a, b) = (self.0, o.0);
        let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        Self([-c[0], c[1], c[2]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (0..3).map(|k| libm::fabs(self.0[k] - o.0[k])).fold(0.0, f64::max)
    }
}

impl Add for AmbientVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for AmbientVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<AmbientVector> for f64 {
    type Output = AmbientVector;
    fn mul(self, v: AmbientVector) -> AmbientVector {
        AmbientVector([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

impl Neg for AmbientVector {
    type Output = Self;
    fn neg(self) -> Self {
        -1.0 * self
    }
}

/// Unit normal of the timelike plane spanned by two null tangents.
pub fn unit_normal(xu: &AmbientVector, xv: &AmbientVector) -> AmbientVector {
    let c = xu.cross(xv);
    (1.0 / libm::sqrt(c.dot(&c))) * c
}

/// An element of the Poincaré group, `x ↦ L x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub linear: [[f64; 3]; 3],
    pub shift: AmbientVector,
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self { linear: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], shift: AmbientVector::default() }
    }

    /// Boost along `x¹` with the given rapidity.
    pub fn boost(rapidity: f64) -> Self {
        let (c, s) = (libm::cosh(rapidity), libm::sinh(rapidity));
        Self { linear: [[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], ..Self::identity() }
    }

    /// Rotation in the spatial `(x¹, x²)` plane.
    pub fn rotation(angle: f64) -> Self {
        let (c, s) = (libm::cos(angle), libm::sin(angle));
        Self { linear: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]], ..Self::identity() }
    }

    pub fn translation(shift: AmbientVector) -> Self {
        Self { shift, ..Self::identity() }
    }

    pub fn then(&self, next: &RigidMotion) -> RigidMotion {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| next.linear[i][k] * self.linear[k][j]).sum();
            }
        }
        RigidMotion { linear: m, shift: next.apply_vector(&self.shift) + next.shift }
    }

    pub fn apply_vector(&self, v: &AmbientVector) -> AmbientVector {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| self.linear[i][k] * v.0[k]).sum();
        }
        AmbientVector(out)
    }

    pub fn apply_point(&self, p: &AmbientVector) -> AmbientVector {
        self.apply_vector(p) + self.shift
    }
}

/// Adapted frame at one point of the slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub x: AmbientVector,
    pub xu: AmbientVector,
    pub xv: AmbientVector,
    pub n: AmbientVector,
}

impl FramePoint {
    /// Largest violation of the frame invariants, relative to `e^ψ` for the
    /// metric entries.
    pub fn defect(&self, psi: f64) -> f64 {
        let g = libm::exp(psi);
        [
            libm::fabs(self.xu.dot(&self.xu)) / g,
            libm::fabs(self.xv.dot(&self.xv)) / g,
            libm::fabs(self.xu.dot(&self.xv) / g - 1.0),
            libm::fabs(self.n.dot(&self.n) - 1.0),
            libm::fabs(self.n.dot(&self.xu)) / libm::sqrt(g),
            libm::fabs(self.n.dot(&self.xv)) / libm::sqrt(g),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        Self {
            x: m.apply_point(&self.x),
            xu: m.apply_vector(&self.xu),
            xv: m.apply_vector(&self.xv),
            n: m.apply_vector(&self.n),
        }
    }
}

/// The flat frame with conformal factor `ψ` placed at `(0, x, 0)`.
pub fn canonical_seed(x: f64, psi: f64) -> FramePoint {
    let c = libm::exp(0.5 * psi) / core::f64::consts::SQRT_2;
    FramePoint {
        x: AmbientVector::new(0.0, x, 0.0),
        xu: AmbientVector::new(c, c, 0.0),
        xv: AmbientVector::new(-c, c, 0.0),
        n: AmbientVector::new(0.0, 0.0, 1.0),
    }
}

/// Frame of the graph `(0, x, φ₀(x))` at its leftmost node. The slope is the
/// one used by the data conversion, so the seed matches `ψ₀ = ln(2(1+φ₀'²))`.
pub fn graph_seed(g: &GraphData) -> Result<FramePoint> {
    let x0 = g.grid().origin();
    let p = derivative(g.phi0())?.values()[0];
    let q = g.phi1().values()[0];
    let s = 1.0 + p * p;
    let w = 1.0 - q * q + p * p;
    if !(w > 0.0) {
        return Err(Error::NotTimelike { x: x0, t: 0.0, radicand: w });
    }
    let sw = libm::sqrt(w);
    // ∂_r X and ∂_t X = a ∂_r X + b e_T in the graph chart
    let tr = AmbientVector::new(0.0, 1.0, p);
    let tt = AmbientVector::new(1.0, 0.0, q);
    let y = (-q * p / sw) * tr + (s / sw) * tt;
    let xu = tr + y;
    let xv = tr - y;
    Ok(FramePoint { x: AmbientVector::new(0.0, x0, g.phi0().values()[0]), xu, xv, n: unit_normal(&xu, &xv) })
}

/// The frame along the slice, one entry per data node (`s = r/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SliceFrame {
    grid: GridSpec1D,
    points: Vec<FramePoint>,
    psi0: Vec<f64>,
}

impl SliceFrame {
    /// Grid in the slice parameter `s = r/2`.
    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn points(&self) -> &[FramePoint] {
        &self.points
    }

    pub fn psi0(&self) -> &[f64] {
        &self.psi0
    }

    /// Largest invariant violation along the slice.
    pub fn max_defect(&self) -> f64 {
        self.points.iter().zip(&self.psi0).map(|(p, &psi)| p.defect(psi)).fold(0.0, f64::max)
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        Self { points: self.points.iter().map(|p| p.transformed(m)).collect(), ..self.clone() }
    }
}

const SEED_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy)]
struct Coeffs {
    psi_u: f64,
    psi_v: f64,
    lambda: f64,
    nu: f64,
    e_neg_psi: f64,
}

fn rhs(y: &FramePoint, c: &Coeffs) -> FramePoint {
    FramePoint {
        x: y.xu + y.xv,
        xu: c.psi_u * y.xu + c.lambda * y.n,
        xv: c.psi_v * y.xv + c.nu * y.n,
        n: (-c.e_neg_psi) * (c.lambda * y.xv + c.nu * y.xu),
    }
}

fn axpy(y: &FramePoint, a: f64, k: &FramePoint) -> FramePoint {
    FramePoint { x: y.x + a * k.x, xu: y.xu + a * k.xu, xv: y.xv + a * k.xv, n: y.n + a * k.n }
}

/// Classical RK4 in `s` with step `h/2`; coefficients at half steps come from
/// cubic interpolation of the sampled data.
pub fn integrate_slice_frame(gd: &GeometricData, seed: FramePoint) -> Result<SliceFrame> {
    let grid = *gd.grid();
    let psi0 = gd.psi0.values();
    if seed.defect(psi0[0]) > SEED_TOLERANCE || !seed.x.is_finite() {
        return Err(Error::InvalidSeed(alloc::format!(
            "seed frame violates the invariants by {:e} (tolerance {SEED_TOLERANCE:e})",
            seed.defect(psi0[0])
        )));
    }
    let dpsi = derivative(&gd.psi0)?;
    let at = |f: &SampledFunction1D, r: f64| f.interpolate(r).expect("midpoint lies inside the grid");
    let coeffs = |r: f64, node: Option<usize>| -> Coeffs {
        let (d, p1, l, nu, p0) = match node {
            Some(j) => (dpsi.values()[j], gd.psi1.values()[j], gd.lambda0.values()[j], gd.nu0.values()[j], psi0[j]),
            None => (at(&dpsi, r), at(&gd.psi1, r), at(&gd.lambda0, r), at(&gd.nu0, r), at(&gd.psi0, r)),
        };
        Coeffs { psi_u: d + p1, psi_v: d - p1, lambda: l, nu, e_neg_psi: libm::exp(-p0) }
    };

    let ds = 0.5 * grid.spacing();
    let mut points = Vec::with_capacity(grid.count());
    points.push(seed);
    let mut y = seed;
    for j in 0..grid.count() - 1 {
        let c0 = coeffs(grid.coord(j), Some(j));
        let cm = coeffs(grid.coord(j) + 0.5 * grid.spacing(), None);
        let c1 = coeffs(grid.coord(j + 1), Some(j + 1));
        let k1 = rhs(&y, &c0);
        let k2 = rhs(&axpy(&y, 0.5 * ds, &k1), &cm);
        let k3 = rhs(&axpy(&y, 0.5 * ds, &k2), &cm);
        let k4 = rhs(&axpy(&y, ds, &k3), &c1);
        let mut next = y;
        for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
            next = axpy(&next, w * ds / 6.0, k);
        }
        if !(next.x.is_finite() && next.xu.is_finite() && next.xv.is_finite() && next.n.is_finite()) {
            return Err(Error::InvalidSeed(alloc::format!(
                "frame integration overflowed at r = {}",
                grid.coord(j + 1)
            )));
        }
        y = next;
        points.push(y);
    }
    Ok(SliceFrame { grid: grid.scaled(0.5), points, psi0: psi0.to_vec() })
}

/// Closed intervals of `u` and `v` covered by an [`Embedding`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRegion {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl EmbeddingRegion {
    /// The full square of null coordinates reachable from the slice.
    pub fn full(frame: &SliceFrame) -> Self {
        let g = frame.grid();
        Self { u: (g.origin(), g.end()), v: (g.origin(), g.end()) }
    }
}

/// `X(u, v) = X₀ + P_u(u) + P_v(v)` with trapezoidal prefix integrals of
/// the slice tangents. Points are built on demand.
#[derive(Debug, Clone)]
pub struct Embedding {
    grid: GridSpec1D,
    base: AmbientVector,
    xu: Vec<AmbientVector>,
    xv: Vec<AmbientVector>,
    pu: Vec<AmbientVector>,
    pv: Vec<AmbientVector>,
    // index bounds of the region, inclusive
    u_idx: (usize, usize),
    v_idx: (usize, usize),
}

fn prefix(vs: &[AmbientVector], ds: f64) -> Vec<AmbientVector> {
    let mut out = Vec::with_capacity(vs.len());
    let mut acc = AmbientVector::default();
    out.push(acc);
    for w in vs.windows(2) {
        acc = acc + (0.5 * ds) * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

pub fn assemble_embedding(frame: &SliceFrame, region: EmbeddingRegion) -> Result<Embedding> {
    let g = *frame.grid();
    let idx = |(lo, hi): (f64, f64), name: &str| -> Result<(usize, usize)> {
        let tol = 1e-9 * g.spacing();
        if !(lo <= hi) || lo < g.origin() - tol || hi > g.end() + tol {
            return Err(Error::OutOfDomain(alloc::format!(
                "{name} interval [{lo}, {hi}] exceeds the frame extent [{}, {}]",
                g.origin(),
                g.end()
            )));
        }
        let a = libm::floor(g.position(lo) + 1e-9).max(0.0) as usize;
        let b = (libm::ceil(g.position(hi) - 1e-9) as usize).min(g.count() - 1);
        Ok((a, b))
    };
    let u_idx = idx(region.u, "u")?;
    let v_idx = idx(region.v, "v")?;
    let xu: Vec<_> = frame.points.iter().map(|p| p.xu).collect();
    let xv: Vec<_> = frame.points.iter().map(|p| p.xv).collect();
    let ds = g.spacing();
    Ok(Embedding { grid: g, base: frame.points[0].x, pu: prefix(&xu, ds), pv: prefix(&xv, ds), xu, xv, u_idx, v_idx })
}

impl Embedding {
    /// Grid shared by `u` and `v`.
    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn u_range(&self) -> (usize, usize) {
        self.u_idx
    }

    pub fn v_range(&self) -> (usize, usize) {
        self.v_idx
    }

    fn check(&self, i: usize, k: usize) -> Result<()> {
        if i < self.u_idx.0 || i > self.u_idx.1 || k < self.v_idx.0 || k > self.v_idx.1 {
            return Err(Error::OutOfDomain(alloc::format!("node (u#{i}, v#{k}) is outside the embedding region")));
        }
        Ok(())
    }

    pub fn point(&self, i: usize, k: usize) -> Result<AmbientVector> {
        self.check(i, k)?;
        Ok(self.base + self.pu[i] + self.pv[k])
    }

    pub fn xu(&self, i: usize) -> AmbientVector {
        self.xu[i]
    }

    pub fn xv(&self, k: usize) -> AmbientVector {
        self.xv[k]
    }

    pub fn normal(&self, i: usize, k: usize) -> Result<AmbientVector> {
        self.check(i, k)?;
        Ok(unit_normal(&self.xu[i], &self.xv[k]))
    }

    /// Evolution coordinates `(t, r)` of node `(i, k)`.
    pub fn tr(&self, i: usize, k: usize) -> (f64, f64) {
        let (u, v) = (self.grid.coord(i), self.grid.coord(k));
        (u - v, u + v)
    }

    /// `X` at arbitrary `(u, v)`: linear in each variable between nodes,
    /// consistent with the trapezoidal prefix sums.
    pub fn point_at(&self, u: f64, v: f64) -> Result<AmbientVector> {
        let (i, a) = self.locate(u, self.u_idx)?;
        let (k, b) = self.locate(v, self.v_idx)?;
        let ds = self.grid.spacing();
        let su = (1.0 / ds) * (self.pu[i + 1] - self.pu[i]);
        let sv = (1.0 / ds) * (self.pv[k + 1] - self.pv[k]);
        Ok(self.base + self.pu[i] + (a * ds) * su + self.pv[k] + (b * ds) * sv)
    }

    fn locate(&self, s: f64, (lo, hi): (usize, usize)) -> Result<(usize, f64)> {
        let p = self.grid.position(s);
        let tol = 1e-9;
        if p < lo as f64 - tol || p > hi as f64 + tol || hi == lo {
            return Err(Error::OutOfDomain(alloc::format!("coordinate {s} is outside the embedding region")));
        }
        let i = (libm::floor(p).max(lo as f64) as usize).min(hi - 1);
        Ok((i, p - i as f64))
    }
}

/// Height samples from [`regraph`]; `mask[i]` is false where the query
/// point could not be located on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Regraphed {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Regraphed {
    pub fn all_found(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

/// Heights `x²` of the surface over the query points `(T, x)`.
///
/// Within a cell `[u_i, u_{i+1}] × [v_k, v_{k+1}]` the interpolated map is
/// affine, so each cell is inverted exactly; a walk moves to the neighbour
/// cell until the local coordinates fall inside. Queries where the walk
/// leaves the region, cycles, or meets a degenerate cell are masked out.
pub fn regraph(e: &Embedding, queries: &[(f64, f64)]) -> Regraphed {
    let mut values = Vec::with_capacity(queries.len());
    let mut mask = Vec::with_capacity(queries.len());
    let (ulo, uhi) = e.u_idx;
    let (vlo, vhi) = e.v_idx;
    if uhi <= ulo || vhi <= vlo {
        return Regraphed { values: alloc::vec![f64::NAN; queries.len()], mask: alloc::vec![false; queries.len()] };
    }
    for &(tq, xq) in queries {
        // flat guess: t = u − v, x = u + v
        let pu = e.grid.position(0.5 * (xq + tq));
        let pv = e.grid.position(0.5 * (xq - tq));
        let clamp = |p: f64, lo: usize, hi: usize| (libm::floor(p).max(lo as f64).min((hi - 1) as f64)) as usize;
        let (mut i, mut k) = (clamp(pu, ulo, uhi), clamp(pv, vlo, vhi));
        let mut found = None;
        for _ in 0..4 * (uhi - ulo + vhi - vlo + 2) {
            let o = e.base + e.pu[i] + e.pv[k];
            let a = e.pu[i + 1] - e.pu[i];
            let b = e.pv[k + 1] - e.pv[k];
            let det = a.0[0] * b.0[1] - b.0[0] * a.0[1];
            if !(libm::fabs(det) > 1e-300) {
                break;
            }
            let (r0, r1) = (tq - o.0[0], xq - o.0[1]);
            let alpha = (r0 * b.0[1] - b.0[0] * r1) / det;
            let beta = (a.0[0] * r1 - r0 * a.0[1]) / det;
            let tol = 1e-10;
            let inside_a = (-tol..=1.0 + tol).contains(&alpha);
            let inside_b = (-tol..=1.0 + tol).contains(&beta);
            if inside_a && inside_b {
                found = Some(o.0[2] + alpha * a.0[2] + beta * b.0[2]);
                break;
            }
            let step = |x: f64, c: usize, lo: usize, hi: usize| -> Option<usize> {
                let target = c as f64 + libm::floor(x);
                if target < lo as f64 - 0.5 || target > (hi - 1) as f64 + 0.5 {
                    // clamp once at the boundary; leaving means the point is off the surface
                    if (x < 0.0 && c == lo) || (x > 1.0 && c == hi - 1) {
                        return None;
                    }
                    return Some(if x < 0.0 { lo } else { hi - 1 });
                }
                Some(target as usize)
            };
            let ni = if inside_a { Some(i) } else { step(alpha, i, ulo, uhi) };
            let nk = if inside_b { Some(k) } else { step(beta, k, vlo, vhi) };
            match (ni, nk) {
                (Some(a2), Some(b2)) if (a2, b2) != (i, k) => {
                    i = a2;
                    k = b2;
                }
                _ => break,
            }
        }
        match found {
            Some(z) => {
                values.push(z);
                mask.push(true);
            }
            None => {
                values.push(f64::NAN);
                mask.push(false);
            }
        }
    }
    Regraphed { values, mask }
}

/// Defects of the reconstructed surface against the evolved `ψ` and the
/// transported `(Λ, V)`.
///
/// Metrics (all sup-norms):
/// * `null_defect`: `|⟨X_u,X_u⟩|`, `|⟨X_v,X_v⟩|` relative to `e^ψ`;
/// * `metric_defect`: `|⟨X_u(u), X_v(v)⟩ − e^{ψ(t,r)}|` on stored trusted nodes;
/// * `normal_defect`: `|⟨n,n⟩ − 1|` and `|⟨n,X_u⟩|`, `|⟨n,X_v⟩|` for the
///   transported normal;
/// * `lambda_defect`, `nu_defect`: second differences of `X` against `n`,
///   minus `Λ(u)`, `V(v)`;
/// * `trace_defect`: `2 e^{−ψ} ⟨X_uv, n⟩`;
/// * `mixed_defect`: the cross difference of `X` (the discrete `X_uv`).
pub fn embedding_checks(e: &Embedding, frame: &SliceFrame, ev: &Evolution, np: &NullPair) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("embedding");
    let g = &e.grid;
    let ds = g.spacing();

    let mut null = 0.0f64;
    let mut normal = 0.0f64;
    for (p, &psi) in frame.points.iter().zip(&frame.psi0) {
        let gm = libm::exp(psi);
        null = null.max(libm::fabs(p.xu.dot(&p.xu)) / gm).max(libm::fabs(p.xv.dot(&p.xv)) / gm);
        normal = normal
            .max(libm::fabs(p.n.dot(&p.n) - 1.0))
            .max(libm::fabs(p.n.dot(&p.xu)) / libm::sqrt(gm))
            .max(libm::fabs(p.n.dot(&p.xv)) / libm::sqrt(gm));
    }

    // metric against the evolved ψ on every stored, trusted node
    let xu_fn: [SampledFunction1D; 3] = core::array::from_fn(|c| {
        SampledFunction1D::new(*g, e.xu.iter().map(|v| v.0[c]).collect()).expect("frame samples are finite")
    });
    let xv_fn: [SampledFunction1D; 3] = core::array::from_fn(|c| {
        SampledFunction1D::new(*g, e.xv.iter().map(|v| v.0[c]).collect()).expect("frame samples are finite")
    });
    let eval = |f: &[SampledFunction1D; 3], s: f64| -> Option<AmbientVector> {
        Some(AmbientVector::new(f[0].interpolate(s)?, f[1].interpolate(s)?, f[2].interpolate(s)?))
    };
    let (r_lo, r_hi) = ev.report_interval();
    let mut metric = 0.0f64;
    for snap in ev.snapshots() {
        for (k, &psi) in snap.values.iter().enumerate() {
            let r = ev.grid().coord(snap.first + k);
            if r < r_lo - 1e-12 || r > r_hi + 1e-12 {
                continue;
            }
            let (u, v) = (0.5 * (r + snap.t), 0.5 * (r - snap.t));
            if let (Some(a), Some(b)) = (eval(&xu_fn, u), eval(&xv_fn, v)) {
                metric = metric.max(libm::fabs(a.dot(&b) - libm::exp(psi)));
            }
        }
    }

    // second differences of the assembled X on interior region nodes
    let (ulo, uhi) = e.u_idx;
    let (vlo, vhi) = e.v_idx;
    let stride = |lo: usize, hi: usize| ((hi - lo) / 64).max(1);
    let (su, sv) = (stride(ulo, uhi), stride(vlo, vhi));
    let mut lam = 0.0f64;
    let mut nu = 0.0f64;
    let mut trace = 0.0f64;
    let mut mixed = 0.0f64;
    let mut i = ulo + 1;
    while i < uhi {
        let mut k = vlo + 1;
        while k < vhi {
            let x = |a: usize, b: usize| e.base + e.pu[a] + e.pv[b];
            let n = unit_normal(&e.xu[i], &e.xv[k]);
            let xuu = (1.0 / (ds * ds)) * (x(i + 1, k) - 2.0 * x(i, k) + x(i - 1, k));
            let xvv = (1.0 / (ds * ds)) * (x(i, k + 1) - 2.0 * x(i, k) + x(i, k - 1));
            let xuv = (1.0 / (ds * ds)) * (x(i + 1, k + 1) - x(i + 1, k) - x(i, k + 1) + x(i, k));
            let (u, v) = (g.coord(i), g.coord(k));
            if let (Some(l), Some(m)) = (np.lambda_at_u(u), np.nu_at_v(v)) {
                lam = lam.max(libm::fabs(xuu.dot(&n) - l));
                nu = nu.max(libm::fabs(xvv.dot(&n) - m));
            }
            let guv = e.xu[i].dot(&e.xv[k]);
            trace = trace.max(libm::fabs(2.0 * xuv.dot(&n) / guv));
            // X_uv vanishes identically for the additive assembly, so only the
            // undivided difference relative to |X| is meaningful (rounding)
            let scale = (0..3).map(|c| libm::fabs(x(i, k).0[c])).fold(1.0, f64::max);
            mixed = mixed.max((0..3).map(|c| libm::fabs(xuv.0[c]) * ds * ds / scale).fold(0.0, f64::max));
            k += sv;
        }
        i += su;
    }

    rep.metric("null_defect", null)
        .metric("metric_defect", metric)
        .metric("normal_defect", normal)
        .metric("lambda_defect", lam)
        .metric("nu_defect", nu)
        .metric("trace_defect", trace)
        .metric("mixed_defect", mixed);
    rep
}
