//! Direct finite-difference solver for the height function `φ(t, x)` of a
//! timelike minimal graph,
//!
//! `(1+φ_x²) φ_tt − 2 φ_t φ_x φ_tx − (1−φ_t²) φ_xx = 0`.
//!
//! This is the independent reference for the geometric pipeline. It steps the
//! expanded non-divergence form with a centered three-level scheme; the
//! centered `φ_t` and `φ_tx` involve the new level, so each step is a small
//! fixed-point iteration.

use alloc::vec::Vec;

use crate::evolution::{EvolveConfig, TrustedRegion};
use crate::fields::{derivative, second_derivative, GridSpec1D, SampledFunction1D};
use crate::initial_data::{validate_timelike, GraphData};
use crate::{Error, Result};

/// A step is rejected once the radicand `1 − φ_t² + φ_x²` drops below this.
pub const RADICAND_FLOOR: f64 = 1e-6;

const FIXED_POINT_TOL: f64 = 1e-15;
const FIXED_POINT_MAX: usize = 100;

/// First and second derivatives of `φ` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_tt: f64,
    pub phi_tx: f64,
    pub phi_xx: f64,
}

pub fn radicand(phi_t: f64, phi_x: f64) -> f64 {
    1.0 - phi_t * phi_t + phi_x * phi_x
}

/// Left-hand side of the expanded equation. Errors if the jet is not
/// timelike.
pub fn quasilinear_form(j: Jet) -> Result<f64> {
    let w = radicand(j.phi_t, j.phi_x);
    if !(w > 0.0) {
        return Err(Error::NotTimelike { x: f64::NAN, t: f64::NAN, radicand: w });
    }
    Ok((1.0 + j.phi_x * j.phi_x) * j.phi_tt - 2.0 * j.phi_t * j.phi_x * j.phi_tx - (1.0 - j.phi_t * j.phi_t) * j.phi_xx)
}

/// `φ_tt` solved from the equation.
fn acceleration(phi_t: f64, phi_x: f64, phi_tx: f64, phi_xx: f64) -> f64 {
    (2.0 * phi_t * phi_x * phi_tx + (1.0 - phi_t * phi_t) * phi_xx) / (1.0 + phi_x * phi_x)
}

/// Largest `|dx/dt|` of the two characteristic families,
/// `(φ_tφ_x ± √W)/(1+φ_x²)`.
pub fn characteristic_speed(phi_t: f64, phi_x: f64) -> f64 {
    let w = radicand(phi_t, phi_x).max(0.0);
    (libm::fabs(phi_t * phi_x) + libm::sqrt(w)) / (1.0 + phi_x * phi_x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub level: usize,
    pub t: f64,
    pub first: usize,
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub radicand: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GraphEvolution {
    grid: GridSpec1D,
    dt: f64,
    levels: usize,
    snapshots: Vec<GraphSnapshot>,
    min_radicand: f64,
    report: (f64, f64),
}

impl GraphEvolution {
    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn t_final(&self) -> f64 {
        (self.levels - 1) as f64 * self.dt
    }

    pub fn snapshots(&self) -> &[GraphSnapshot] {
        &self.snapshots
    }

    pub fn last(&self) -> &GraphSnapshot {
        self.snapshots.last().expect("graph evolution always stores its final level")
    }

    /// Smallest radicand met on any trusted node.
    pub fn min_radicand(&self) -> f64 {
        self.min_radicand
    }

    pub fn report_interval(&self) -> (f64, f64) {
        self.report
    }

    pub fn trusted(&self) -> TrustedRegion {
        TrustedRegion { grid: self.grid, dt: self.dt, levels: self.levels }
    }

    /// `φ` at the final level as a sampled function on its trusted range.
    pub fn final_phi(&self) -> Result<SampledFunction1D> {
        let s = self.last();
        let g = GridSpec1D::new(self.grid.coord(s.first), self.grid.spacing(), s.phi.len())?;
        SampledFunction1D::new(g, s.phi.clone())
    }
}

/// Centered `∂_x` of `row` on `lo..=hi`, one-sided at the ends.
fn dx(row: &[f64], j: usize, lo: usize, hi: usize, h: f64) -> f64 {
    if j > lo && j < hi {
        (row[j + 1] - row[j - 1]) / (2.0 * h)
    } else if j == lo {
        (-3.0 * row[j] + 4.0 * row[j + 1] - row[j + 2]) / (2.0 * h)
    } else {
        (3.0 * row[j] - 4.0 * row[j - 1] + row[j - 2]) / (2.0 * h)
    }
}

/// Explicit evolution of graph data; `Δt = cfl·h / (max characteristic speed
/// at t = 0)`, shortened so that it divides `t_final`.
pub fn evolve_graph(g: &GraphData, cfg: &EvolveConfig) -> Result<GraphEvolution> {
    cfg.validate()?;
    validate_timelike(g)?;
    let grid = *g.grid();
    let h = cfg.h;
    if libm::fabs(grid.spacing() - h) > 1e-12 * h {
        return Err(Error::InvalidInput(alloc::format!(
            "data spacing {} differs from configured h = {}",
            grid.spacing(),
            h
        )));
    }
    let n = grid.count();
    let phi0 = g.phi0().values();
    let phi1 = g.phi1().values();
    let p0x = derivative(g.phi0())?;
    let p0xx = second_derivative(g.phi0())?;
    let p1x = derivative(g.phi1())?;

    let speed0 = (0..n).map(|j| characteristic_speed(phi1[j], p0x.values()[j])).fold(0.0, f64::max);
    let dt0 = cfg.cfl * h / speed0.max(1e-300);
    let steps = libm::ceil(cfg.t_final / dt0 - 1e-9) as usize;
    let dt = cfg.t_final / steps as f64;
    // Speeds never exceed 1, so this never needs more steps than the
    // ψ-evolution the data grid was padded for.
    let shrink = steps as f64 * h;
    let tol = 1e-9 * h;
    if 2 * steps + 1 > n || grid.origin() + shrink > cfg.r_min + tol || grid.end() - shrink < cfg.r_max - tol {
        return Err(Error::InvalidInput(alloc::format!(
            "data on [{}, {}] does not pad [{}, {}] by {} steps",
            grid.origin(),
            grid.end(),
            cfg.r_min,
            cfg.r_max,
            steps
        )));
    }
    let limit = h / dt;
    let every = cfg.snapshot_every;

    let mut out = GraphEvolution {
        grid,
        dt,
        levels: steps + 1,
        snapshots: Vec::new(),
        min_radicand: f64::INFINITY,
        report: (cfg.r_min, cfg.r_max),
    };
    let record = |out: &mut GraphEvolution, level: usize, phi: &[f64], phi_t: &[f64]| -> Result<()> {
        let (lo, hi) = (level, n - 1 - level);
        let t = level as f64 * dt;
        let mut rad = Vec::with_capacity(hi - lo + 1);
        for j in lo..=hi {
            let px = if hi - lo >= 2 { dx(phi, j, lo, hi, h) } else { 0.0 };
            let w = radicand(phi_t[j], px);
            if !(w >= RADICAND_FLOOR) {
                return Err(Error::NotTimelike { x: grid.coord(j), t, radicand: w });
            }
            out.min_radicand = out.min_radicand.min(w);
            rad.push(w);
        }
        if level.is_multiple_of(every) || level == steps {
            out.snapshots.push(GraphSnapshot {
                level,
                t,
                first: lo,
                phi: phi[lo..=hi].to_vec(),
                phi_t: phi_t[lo..=hi].to_vec(),
                radicand: rad,
            });
        }
        Ok(())
    };

    record(&mut out, 0, phi0, phi1)?;

    // Taylor start, with φ_tt from the equation.
    let mut prev = phi0.to_vec();
    let mut cur = alloc::vec![0.0; n];
    let mut cur_t = alloc::vec![0.0; n];
    for j in 1..n - 1 {
        let acc = acceleration(phi1[j], p0x.values()[j], p1x.values()[j], p0xx.values()[j]);
        cur[j] = phi0[j] + dt * phi1[j] + 0.5 * dt * dt * acc;
        cur_t[j] = phi1[j] + dt * acc;
    }
    record(&mut out, 1, &cur, &cur_t)?;

    let mut next = alloc::vec![0.0; n];
    let mut next_t = alloc::vec![0.0; n];
    let mut guess = alloc::vec![0.0; n];
    for level in 1..steps {
        let t = level as f64 * dt;
        let (lo, hi) = (level + 1, n - 2 - level);
        // the explicit guess uses the current φ_t estimate
        for j in lo..=hi {
            let px = (cur[j + 1] - cur[j - 1]) / (2.0 * h);
            let pxx = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) / (h * h);
            let ptx = (cur_t[j + 1] - cur_t[j - 1]) / (2.0 * h);
            let speed = characteristic_speed(cur_t[j], px);
            if speed > limit * (1.0 + 1e-12) {
                return Err(Error::CflViolation { t, speed, limit });
            }
            guess[j] = 2.0 * cur[j] - prev[j] + dt * dt * acceleration(cur_t[j], px, ptx, pxx);
        }
        let mut pt = alloc::vec![0.0; hi - lo + 1];
        let mut converged = false;
        for _ in 0..FIXED_POINT_MAX {
            for j in lo..=hi {
                pt[j - lo] = (guess[j] - prev[j]) / (2.0 * dt);
            }
            let mut delta = 0.0f64;
            for j in lo..=hi {
                // one-sided at the ends keeps the stencil inside the new
                // level's trusted range
                let ptx = if hi - lo >= 2 { dx(&pt, j - lo, 0, hi - lo, h) } else { 0.0 };
                let px = (cur[j + 1] - cur[j - 1]) / (2.0 * h);
                let pxx = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) / (h * h);
                let v = 2.0 * cur[j] - prev[j] + dt * dt * acceleration(pt[j - lo], px, ptx, pxx);
                delta = delta.max(libm::fabs(v - next[j]));
                next[j] = v;
            }
            guess[lo..=hi].copy_from_slice(&next[lo..=hi]);
            if delta <= FIXED_POINT_TOL * (1.0 + libm::fabs(next[lo])) {
                converged = true;
                break;
            }
        }
        if !converged || next[lo..=hi].iter().any(|v| !v.is_finite()) {
            return Err(Error::NotTimelike { x: f64::NAN, t: t + dt, radicand: f64::NAN });
        }
        // φ_t at the new level, second-order backward difference
        for j in lo..=hi {
            next_t[j] = (3.0 * next[j] - 4.0 * cur[j] + prev[j]) / (2.0 * dt);
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
        core::mem::swap(&mut cur_t, &mut next_t);
        record(&mut out, level + 1, &cur, &cur_t)?;
    }
    Ok(out)
}
