//! Solvers for the reduced system: exact transport of `(λ, ν)` and the
//! semilinear wave `ψ_rr − ψ_tt = e^{−ψ} λ₀(r+t) ν₀(r−t)`.
//!
//! Two independent schemes are provided: an explicit three-level leapfrog
//! and a characteristic (diamond-cell) scheme built on the integral form of
//! `∂²_{uv}ψ = F` over a characteristic rectangle,
//!
//! `ψ(P) = ψ(A) + ψ(B) − ψ(C) − ∬ F du dv`,
//!
//! where `P = (t+h, r)`, `A = (t, r+h)`, `B = (t, r−h)`, `C = (t−h, r)`. (The
//! minus sign is because `v = (r−t)/2` decreases towards the future.)
//!
//! Neither scheme imposes a boundary condition. Level `n` is trusted on the
//! index range `n ..= N−1−n`, which is the numerical domain of dependence
//! and, at `cfl = 1`, exactly the domain of determinacy of the sampled
//! interval.

use alloc::vec::Vec;

use crate::fields::{GridSpec1D, SampledFunction1D};
use crate::initial_data::{transport_profiles, GeometricData, NullPair};
use crate::lattice::Field2D;
use crate::{Error, Result};

/// `|ψ|` above this aborts the run.
pub const BLOW_UP_GUARD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Leapfrog,
    Characteristic,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Leapfrog => "leapfrog",
            Scheme::Characteristic => "characteristic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "leapfrog" => Ok(Scheme::Leapfrog),
            "characteristic" => Ok(Scheme::Characteristic),
            other => Err(Error::Config(alloc::format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub h: f64,
    pub cfl: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// Keep every `snapshot_every`-th level (the last level is always kept).
    pub snapshot_every: usize,
}

impl EvolveConfig {
    pub fn new(r_min: f64, r_max: f64, h: f64, t_final: f64) -> Self {
        Self {
            r_min,
            r_max,
            h,
            cfl: 1.0,
            t_final,
            scheme: Scheme::Leapfrog,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            snapshot_every: 1,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_snapshot_every(mut self, k: usize) -> Self {
        self.snapshot_every = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if !(self.r_min < self.r_max) {
            return fail("r_min must be below r_max");
        }
        if !(self.h > 0.0) {
            return fail("h must be positive");
        }
        if !(self.t_final > 0.0) {
            return fail("t_final must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return fail("cfl must lie in (0, 1]");
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iters == 0 {
            return fail("picard_tol and picard_max_iters must be positive");
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every must be at least 1");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.cfl * self.h
    }

    pub fn steps(&self) -> usize {
        libm::ceil(self.t_final / self.dt() - 1e-9) as usize
    }

    /// Number of grid cells added on each side of `[r_min, r_max]`: one per
    /// time step, the speed at which the trusted range shrinks.
    pub fn padding_cells(&self) -> usize {
        self.steps()
    }

    /// Grid the initial data must be sampled on.
    pub fn data_grid(&self) -> Result<GridSpec1D> {
        let pad = self.padding_cells() as f64 * self.h;
        let core_cells = libm::round((self.r_max - self.r_min) / self.h) as usize;
        GridSpec1D::new(self.r_min - pad, self.h, core_cells + 2 * self.padding_cells() + 1)
    }
}

/// Nodes `(n, j)` with `n ≤ j ≤ N−1−n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedRegion {
    pub grid: GridSpec1D,
    pub dt: f64,
    pub levels: usize,
}

impl TrustedRegion {
    pub fn range(&self, level: usize) -> Option<(usize, usize)> {
        let n = self.grid.count();
        if 2 * level >= n {
            return None;
        }
        Some((level, n - 1 - level))
    }

    /// Whether `(t, r)` lies in the trusted region (up to node tolerance).
    pub fn contains(&self, t: f64, r: f64) -> bool {
        if t < -1e-12 || t > (self.levels - 1) as f64 * self.dt + 1e-12 {
            return false;
        }
        let shrink = t / self.dt * self.grid.spacing();
        let tol = 1e-9 * self.grid.spacing();
        r >= self.grid.origin() + shrink - tol && r <= self.grid.end() - shrink + tol
    }
}

/// One stored time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub level: usize,
    pub t: f64,
    /// Grid index of `values[0]`.
    pub first: usize,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(self.first).and_then(|k| self.values.get(k).copied())
    }
}

/// Result of a ψ evolution.
#[derive(Debug, Clone)]
pub struct Evolution {
    grid: GridSpec1D,
    dt: f64,
    scheme: Scheme,
    pair: NullPair,
    snapshots: Vec<Snapshot>,
    level_sup: Vec<f64>,
    report: (f64, f64),
}

impl Evolution {
    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn null_pair(&self) -> &NullPair {
        &self.pair
    }

    pub fn levels(&self) -> usize {
        self.level_sup.len()
    }

    pub fn t_final(&self) -> f64 {
        (self.levels() - 1) as f64 * self.dt
    }

    pub fn trusted(&self) -> TrustedRegion {
        TrustedRegion { grid: self.grid, dt: self.dt, levels: self.levels() }
    }

    /// The `[r_min, r_max]` interval the run was configured to cover.
    pub fn report_interval(&self) -> (f64, f64) {
        self.report
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// `sup |ψ|` over the trusted nodes of every level (all levels, not only
    /// the stored ones).
    pub fn level_sup(&self) -> &[f64] {
        &self.level_sup
    }

    pub fn snapshot(&self, level: usize) -> Option<&Snapshot> {
        self.snapshots.binary_search_by_key(&level, |s| s.level).ok().map(|i| &self.snapshots[i])
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("evolution always stores its final level")
    }

    pub fn psi(&self, level: usize, j: usize) -> Option<f64> {
        self.snapshot(level)?.get(j)
    }

    /// ψ at a stored level, interpolated in `r`.
    pub fn psi_at(&self, level: usize, r: f64) -> Option<f64> {
        let s = self.snapshot(level)?;
        let g = GridSpec1D::new(self.grid.coord(s.first), self.grid.spacing(), s.values.len()).ok()?;
        SampledFunction1D::new(g, s.values.clone()).ok()?.interpolate(r)
    }

    /// Dense field of the stored levels `levels` restricted to grid indices
    /// `j_lo..=j_hi`; every requested node must be stored and trusted.
    pub fn field(&self, levels: &[usize], j_lo: usize, j_hi: usize) -> Result<Field2D> {
        if levels.len() < 2 {
            return Err(Error::InvalidInput("need at least two levels".into()));
        }
        let stride = levels[1] - levels[0];
        if levels.windows(2).any(|w| w[1] - w[0] != stride) || stride == 0 {
            return Err(Error::InvalidInput("levels must be evenly spaced".into()));
        }
        let mut values = Vec::with_capacity(levels.len() * (j_hi - j_lo + 1));
        for &n in levels {
            let s = self.snapshot(n).ok_or_else(|| Error::OutOfDomain(alloc::format!("level {n} was not stored")))?;
            for j in j_lo..=j_hi {
                values.push(s.get(j).ok_or_else(|| {
                    Error::OutOfDomain(alloc::format!("node ({n}, {j}) is outside the trusted region"))
                })?);
            }
        }
        let g = GridSpec1D::new(self.grid.coord(j_lo), self.grid.spacing(), j_hi - j_lo + 1)?;
        Field2D::new(g, levels[0] as f64 * self.dt, stride as f64 * self.dt, levels.len(), values)
    }

    /// `λν` on the same nodes as [`Evolution::field`].
    pub fn source_field(&self, levels: &[usize], j_lo: usize, j_hi: usize) -> Result<Field2D> {
        let psi = self.field(levels, j_lo, j_hi)?;
        Field2D::from_fn(*psi.r_grid(), psi.t0(), psi.dt(), psi.levels(), |t, r| {
            self.pair.source_at(t, r).unwrap_or(0.0)
        })
    }
}

/// Shared marching loop: stores levels, tracks the trusted sup and enforces
/// the blow-up guard.
struct Marcher {
    grid: GridSpec1D,
    dt: f64,
    steps: usize,
    every: usize,
    snapshots: Vec<Snapshot>,
    level_sup: Vec<f64>,
}

impl Marcher {
    fn new(grid: GridSpec1D, cfg: &EvolveConfig) -> Self {
        Self {
            grid,
            dt: cfg.dt(),
            steps: cfg.steps(),
            every: cfg.snapshot_every,
            snapshots: Vec::new(),
            level_sup: Vec::with_capacity(cfg.steps() + 1),
        }
    }

    fn record(&mut self, level: usize, row: &[f64]) -> Result<()> {
        let n = self.grid.count();
        let (lo, hi) = (level, n - 1 - level);
        let mut sup = 0.0f64;
        for j in lo..=hi {
            let v = row[j];
            if !(libm::fabs(v) <= BLOW_UP_GUARD) {
                return Err(Error::BlowUp { t: level as f64 * self.dt, r: self.grid.coord(j), psi: v });
            }
            sup = sup.max(libm::fabs(v));
        }
        self.level_sup.push(sup);
        if level.is_multiple_of(self.every) || level == self.steps {
            self.snapshots.push(Snapshot {
                level,
                t: level as f64 * self.dt,
                first: lo,
                values: row[lo..=hi].to_vec(),
            });
        }
        Ok(())
    }
}

fn check_data(gd: &GeometricData, cfg: &EvolveConfig) -> Result<GridSpec1D> {
    cfg.validate()?;
    let g = *gd.grid();
    if libm::fabs(g.spacing() - cfg.h) > 1e-12 * cfg.h {
        return Err(Error::InvalidInput(alloc::format!(
            "data spacing {} differs from configured h = {}",
            g.spacing(),
            cfg.h
        )));
    }
    let steps = cfg.steps();
    if 2 * steps + 1 > g.count() {
        return Err(Error::InvalidInput("data interval too short: the trusted region closes before t_final".into()));
    }
    let shrink = steps as f64 * g.spacing();
    let tol = 1e-9 * g.spacing();
    if g.origin() + shrink > cfg.r_min + tol || g.end() - shrink < cfg.r_max - tol {
        return Err(Error::InvalidInput(alloc::format!(
            "data on [{}, {}] does not pad [{}, {}] by {} steps; sample on the configured data grid",
            g.origin(),
            g.end(),
            cfg.r_min,
            cfg.r_max,
            steps
        )));
    }
    Ok(g)
}

/// Source `λ₀(r_j + t) ν₀(r_j − t)` for a whole level, exact lookups when
/// `r ± t` sit on nodes.
fn source_row(pair: &NullPair, grid: &GridSpec1D, t: f64, lo: usize, hi: usize, out: &mut [f64]) {
    for j in lo..=hi {
        out[j] = pair.source_at(t, grid.coord(j)).unwrap_or(0.0);
    }
}

/// Three-level leapfrog with the source evaluated explicitly at the current
/// level.
pub fn evolve_leapfrog(gd: &GeometricData, cfg: &EvolveConfig) -> Result<Evolution> {
    let grid = check_data(gd, cfg)?;
    let pair = transport_profiles(gd);
    let n = grid.count();
    let dt = cfg.dt();
    let c2 = cfg.cfl * cfg.cfl;
    let mut m = Marcher::new(grid, cfg);

    let psi0 = gd.psi0.values();
    let psi1 = gd.psi1.values();
    let mut prev = psi0.to_vec();
    m.record(0, &prev)?;
    if m.steps == 0 {
        return Ok(finish(m, Scheme::Leapfrog, pair, cfg));
    }

    let mut src = alloc::vec![0.0; n];
    source_row(&pair, &grid, 0.0, 0, n - 1, &mut src);
    let h2 = cfg.h * cfg.h;
    let mut cur = alloc::vec![0.0; n];
    for j in 1..n - 1 {
        let lap = (psi0[j + 1] - 2.0 * psi0[j] + psi0[j - 1]) / h2;
        let acc = lap - libm::exp(-psi0[j]) * src[j];
        cur[j] = psi0[j] + dt * psi1[j] + 0.5 * dt * dt * acc;
    }
    m.record(1, &cur)?;

    let mut next = alloc::vec![0.0; n];
    for level in 1..m.steps {
        let t = level as f64 * dt;
        let (lo, hi) = (level + 1, n - 2 - level);
        source_row(&pair, &grid, t, lo, hi, &mut src);
        for j in lo..=hi {
            next[j] = 2.0 * cur[j] - prev[j] + c2 * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1])
                - dt * dt * libm::exp(-cur[j]) * src[j];
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
        m.record(level + 1, &cur)?;
    }
    Ok(finish(m, Scheme::Leapfrog, pair, cfg))
}

/// Diamond-cell characteristic scheme; requires `cfl = 1` so that the cells
/// are exact characteristic rectangles.
///
/// Each cell solves `ψ_P = ψ_A + ψ_B − ψ_C − h² λν(centre) e^{−ψ̄}` with
/// `ψ̄` the mean of the four corners, by Picard iteration. The first level
/// comes from the Duhamel formula on the backward characteristic triangle
/// (Simpson for `∫ψ₁`, centroid rule for the source).
pub fn evolve_characteristic(gd: &GeometricData, cfg: &EvolveConfig) -> Result<Evolution> {
    let grid = check_data(gd, cfg)?;
    if libm::fabs(cfg.cfl - 1.0) > 1e-12 {
        return Err(Error::Config("the characteristic scheme needs cfl = 1 (cells must follow the null lines)".into()));
    }
    let pair = transport_profiles(gd);
    let n = grid.count();
    let h = cfg.h;
    let mut m = Marcher::new(grid, cfg);

    let psi0 = gd.psi0.values();
    let psi1 = gd.psi1.values();
    let mut prev = psi0.to_vec();
    m.record(0, &prev)?;
    if m.steps == 0 {
        return Ok(finish(m, Scheme::Characteristic, pair, cfg));
    }

    let mut cur = alloc::vec![0.0; n];
    for j in 1..n - 1 {
        let r = grid.coord(j);
        let free = 0.5 * (psi0[j + 1] + psi0[j - 1]) + h / 6.0 * (psi1[j - 1] + 4.0 * psi1[j] + psi1[j + 1]);
        let tc = h / 3.0;
        let s = pair.source_at(tc, r).unwrap_or(0.0);
        let psi_c = psi0[j] + tc * psi1[j];
        cur[j] = free - 0.5 * h * h * s * libm::exp(-psi_c);
    }
    m.record(1, &cur)?;

    let mut next = alloc::vec![0.0; n];
    let mut src = alloc::vec![0.0; n];
    for level in 1..m.steps {
        let t = level as f64 * h;
        let (lo, hi) = (level + 1, n - 2 - level);
        source_row(&pair, &grid, t, lo, hi, &mut src);
        for j in lo..=hi {
            let (a, b, c) = (cur[j + 1], cur[j - 1], prev[j]);
            let free = a + b - c;
            let s = src[j];
            if s == 0.0 {
                next[j] = free;
                continue;
            }
            let k = h * h * s;
            let mut p = free;
            let mut converged = false;
            let mut delta = 0.0;
            for _ in 0..cfg.picard_max_iters {
                let p_new = free - k * libm::exp(-0.25 * (a + b + c + p));
                delta = libm::fabs(p_new - p);
                p = p_new;
                if !p.is_finite() {
                    break;
                }
                if delta <= cfg.picard_tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::PicardDiverged {
                    t: t + h,
                    r: grid.coord(j),
                    residual: delta,
                    iterations: cfg.picard_max_iters,
                });
            }
            next[j] = p;
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
        m.record(level + 1, &cur)?;
    }
    Ok(finish(m, Scheme::Characteristic, pair, cfg))
}

fn finish(m: Marcher, scheme: Scheme, pair: NullPair, cfg: &EvolveConfig) -> Evolution {
    Evolution {
        grid: m.grid,
        dt: m.dt,
        scheme,
        pair,
        snapshots: m.snapshots,
        level_sup: m.level_sup,
        report: (cfg.r_min, cfg.r_max),
    }
}

/// Dispatch on `cfg.scheme`.
pub fn evolve(gd: &GeometricData, cfg: &EvolveConfig) -> Result<Evolution> {
    match cfg.scheme {
        Scheme::Leapfrog => evolve_leapfrog(gd, cfg),
        Scheme::Characteristic => evolve_characteristic(gd, cfg),
    }
}

/// d'Alembert evaluator for data whose source vanishes for all `t ≥ 0`.
#[derive(Debug, Clone)]
pub struct FreeWave {
    psi0: SampledFunction1D,
    integral: SampledFunction1D,
}

impl FreeWave {
    /// `ψ(t, r) = ½[ψ₀(r+t) + ψ₀(r−t)] + ½∫_{r−t}^{r+t} ψ₁`.
    pub fn eval(&self, t: f64, r: f64) -> Option<f64> {
        let (p, m) = (r + t, r - t);
        let even = 0.5 * (self.psi0.interpolate(p)? + self.psi0.interpolate(m)?);
        let odd = 0.5 * (self.integral.interpolate(p)? - self.integral.interpolate(m)?);
        Some(even + odd)
    }
}

/// Closed-form solution when `λ₀(r+t) ν₀(r−t)` vanishes for every `t ≥ 0`:
/// either profile is identically zero, or `λ₀` (moving left) is supported
/// strictly to the left of `ν₀` (moving right).
pub fn free_wave_closed_form(gd: &GeometricData) -> Result<FreeWave> {
    let collide = match (gd.lambda0.support(), gd.nu0.support()) {
        (Some((_, l_hi)), Some((n_lo, _))) => l_hi >= n_lo,
        _ => false,
    };
    if collide {
        return Err(Error::InvalidInput(
            "lambda0(r+t)·nu0(r−t) does not vanish for t ≥ 0; the closed form does not apply".into(),
        ));
    }
    Ok(FreeWave { psi0: gd.psi0.clone(), integral: gd.psi1.cumulative_integral() })
}
