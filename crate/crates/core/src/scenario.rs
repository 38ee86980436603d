//! Named test problems and the error each pipeline is measured by.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostics::{transport_check, ErrorNorms};
use crate::evolution::{evolve, free_wave_closed_form, EvolveConfig, Scheme};
use crate::fields::{sample, GridSpec1D, Profile};
use crate::graph_solver::{evolve_graph, GraphEvolution};
use crate::initial_data::{graph_to_geometric, GeometricData, GraphData};
use crate::reconstruction::{assemble_embedding, graph_seed, integrate_slice_frame, regraph, EmbeddingRegion};
use crate::{Error, Result};

/// Initial data, either as a graph or directly in null gauge.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Graph { phi0: Profile, phi1: Profile },
    Geometric { lambda0: Profile, nu0: Profile, psi0: Profile, psi1: Profile },
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DataSpec::Graph { phi0, phi1 } => [phi0, phi1].iter().try_for_each(|p| p.validate()),
            DataSpec::Geometric { lambda0, nu0, psi0, psi1 } => {
                [lambda0, nu0, psi0, psi1].iter().try_for_each(|p| p.validate())
            }
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(self, DataSpec::Graph { .. })
    }

    pub fn graph(&self, grid: GridSpec1D) -> Result<GraphData> {
        match self {
            DataSpec::Graph { phi0, phi1 } => GraphData::new(sample(phi0, grid)?, sample(phi1, grid)?),
            DataSpec::Geometric { .. } => {
                Err(Error::Config("this pipeline needs graph data, the scenario gives null-gauge data".into()))
            }
        }
    }

    /// Null-gauge data, converting graph data if needed.
    pub fn geometric(&self, grid: GridSpec1D) -> Result<GeometricData> {
        match self {
            DataSpec::Graph { .. } => graph_to_geometric(&self.graph(grid)?),
            DataSpec::Geometric { lambda0, nu0, psi0, psi1 } => {
                GeometricData::new(sample(lambda0, grid)?, sample(nu0, grid)?, sample(psi0, grid)?, sample(psi1, grid)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    /// ψ-solver against the d'Alembert closed form of the same data.
    FreeWave,
    /// Reference graph solver against `φ₀(x − t)`.
    TravellingReference,
    /// convert, evolve, reconstruct, regraph against `φ₀(x − t)`.
    TravellingGeometric,
    /// Regraphed embedding against the reference graph solver.
    CrossPipeline,
    /// Leapfrog against the characteristic scheme.
    SchemeAgreement,
    /// Assembled `λ`, `ν` against the transported initial profiles.
    Transport,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::FreeWave,
        Pipeline::TravellingReference,
        Pipeline::TravellingGeometric,
        Pipeline::CrossPipeline,
        Pipeline::SchemeAgreement,
        Pipeline::Transport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::FreeWave => "free-wave",
            Pipeline::TravellingReference => "travelling-reference",
            Pipeline::TravellingGeometric => "travelling-geometric",
            Pipeline::CrossPipeline => "cross-pipeline",
            Pipeline::SchemeAgreement => "scheme-agreement",
            Pipeline::Transport => "transport",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown pipeline '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub data: DataSpec,
    pub pipeline: Pipeline,
    pub r_min: f64,
    pub r_max: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Courant number of the ψ-evolution.
    pub cfl: f64,
    /// Courant number of the reference graph solver.
    pub graph_cfl: f64,
    /// Spacing in time of the levels compared in space-time pipelines.
    pub sample_dt: f64,
}

impl Scenario {
    pub fn new(name: &str, data: DataSpec, pipeline: Pipeline, r: (f64, f64), t_final: f64) -> Self {
        Self {
            name: name.to_string(),
            data,
            pipeline,
            r_min: r.0,
            r_max: r.1,
            t_final,
            scheme: Scheme::Leapfrog,
            cfl: 1.0,
            graph_cfl: 0.5,
            sample_dt: 0.25,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn evolve_config(&self, h: f64) -> EvolveConfig {
        EvolveConfig::new(self.r_min, self.r_max, h, self.t_final).with_scheme(self.scheme).with_cfl(self.cfl)
    }

    pub fn graph_config(&self, h: f64) -> EvolveConfig {
        EvolveConfig::new(self.r_min, self.r_max, h, self.t_final).with_cfl(self.graph_cfl)
    }

    /// Data grid wide enough for every solver the pipeline runs.
    pub fn data_grid(&self, h: f64) -> Result<GridSpec1D> {
        let a = self.evolve_config(h).data_grid()?;
        let b = self.graph_config(h).data_grid()?;
        Ok(if self.uses_reference() && b.count() > a.count() { b } else { a })
    }

    // regraph queries need the embedding a little past the lines x ± t, so
    // the geometric pipelines take the wider reference padding too
    fn uses_reference(&self) -> bool {
        matches!(self.pipeline, Pipeline::TravellingReference | Pipeline::TravellingGeometric | Pipeline::CrossPipeline)
    }
}

/// The ε = 0.05 small-bump graph scenario.
pub fn small_bump(pipeline: Pipeline, r: (f64, f64), t_final: f64) -> Scenario {
    Scenario::new(
        "small-bump",
        DataSpec::Graph { phi0: Profile::gaussian(0.05, 1.0), phi1: Profile::Zero },
        pipeline,
        r,
        t_final,
    )
}

/// Graph data `(f, −f')` of the right-moving wave `f(x − t)`, `f` a gaussian.
pub fn travelling_wave(pipeline: Pipeline, amplitude: f64, sigma: f64, r: (f64, f64), t_final: f64) -> Scenario {
    Scenario::new(
        "travelling-wave",
        DataSpec::Graph {
            phi0: Profile::gaussian(amplitude, sigma),
            phi1: Profile::GaussianDerivative { amplitude: -amplitude, center: 0.0, sigma },
        },
        pipeline,
        r,
        t_final,
    )
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo - 1e-12 && x <= hi + 1e-12
}

fn norms(diffs: impl Iterator<Item = f64>, weight: f64) -> Result<ErrorNorms> {
    let mut sup = 0.0f64;
    let mut l1 = 0.0;
    let mut nodes = 0;
    for d in diffs {
        if !d.is_finite() {
            return Err(Error::OutOfDomain("comparison met a point without a value".into()));
        }
        sup = sup.max(d);
        l1 += d * weight;
        nodes += 1;
    }
    if nodes == 0 {
        return Err(Error::InvalidInput("no comparison nodes inside the report interval".into()));
    }
    Ok(ErrorNorms { sup, l1, nodes })
}

/// Regraphed heights at `t` over every `x` node of `grid` in `[lo, hi]`.
fn geometric_heights(sc: &Scenario, h: f64, grid: GridSpec1D, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let data = sc.data.graph(grid)?;
    let gd = graph_to_geometric(&data)?;
    // the evolution is not needed for the heights (X_u, X_v are fixed by the
    // slice), but running it keeps the pipeline honest about its domain
    let mut cfg = sc.evolve_config(h);
    cfg.snapshot_every = usize::MAX;
    evolve(&gd, &cfg)?;
    let frame = integrate_slice_frame(&gd, graph_seed(&data)?)?;
    let e = assemble_embedding(&frame, EmbeddingRegion::full(&frame))?;
    let queries: Vec<(f64, f64)> = xs.iter().map(|&x| (t, x)).collect();
    let r = regraph(&e, &queries);
    if !r.all_found() {
        return Err(Error::OutOfDomain("regraph could not locate every query point".into()));
    }
    Ok(r.values)
}

fn reference_final(sc: &Scenario, h: f64, grid: GridSpec1D) -> Result<(GraphEvolution, Vec<(f64, f64)>)> {
    let mut cfg = sc.graph_config(h);
    cfg.snapshot_every = usize::MAX;
    let ev = evolve_graph(&sc.data.graph(grid)?, &cfg)?;
    let s = ev.last();
    let pts = s
        .phi
        .iter()
        .enumerate()
        .map(|(k, &v)| (ev.grid().coord(s.first + k), v))
        .filter(|&(x, _)| within(x, sc.r_min, sc.r_max))
        .collect();
    Ok((ev, pts))
}

/// Error of `scenario`'s pipeline at step `h`.
pub fn scenario_error(sc: &Scenario, h: f64) -> Result<ErrorNorms> {
    sc.data.validate()?;
    let grid = sc.data_grid(h)?;
    match sc.pipeline {
        Pipeline::FreeWave => {
            let gd = sc.data.geometric(grid)?;
            let exact = free_wave_closed_form(&gd)?;
            let mut cfg = sc.evolve_config(h);
            let every = libm::round(sc.sample_dt / cfg.dt()).max(1.0) as usize;
            cfg.snapshot_every = every;
            let ev = evolve(&gd, &cfg)?;
            let g = *ev.grid();
            let diffs = ev.snapshots().iter().flat_map(|s| {
                let exact = &exact;
                s.values.iter().enumerate().filter_map(move |(k, &v)| {
                    let r = g.coord(s.first + k);
                    within(r, sc.r_min, sc.r_max).then(|| libm::fabs(v - exact.eval(s.t, r).unwrap_or(f64::NAN)))
                })
            });
            norms(diffs, h * every as f64 * cfg.dt())
        }
        Pipeline::TravellingReference => {
            let phi0 = match &sc.data {
                DataSpec::Graph { phi0, .. } => phi0.clone(),
                _ => return Err(Error::Config("travelling-wave pipelines need graph data".into())),
            };
            let (ev, pts) = reference_final(sc, h, grid)?;
            let t = ev.t_final();
            norms(pts.iter().map(|&(x, v)| libm::fabs(v - phi0.eval(x - t))), h)
        }
        Pipeline::TravellingGeometric => {
            let phi0 = match &sc.data {
                DataSpec::Graph { phi0, .. } => phi0.clone(),
                _ => return Err(Error::Config("travelling-wave pipelines need graph data".into())),
            };
            let xs: Vec<f64> = grid.coords().filter(|&x| within(x, sc.r_min, sc.r_max)).collect();
            let z = geometric_heights(sc, h, grid, sc.t_final, &xs)?;
            norms(xs.iter().zip(&z).map(|(&x, &v)| libm::fabs(v - phi0.eval(x - sc.t_final))), h)
        }
        Pipeline::CrossPipeline => {
            let (ev, pts) = reference_final(sc, h, grid)?;
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let z = geometric_heights(sc, h, grid, ev.t_final(), &xs)?;
            norms(pts.iter().zip(&z).map(|(&(_, v), &w)| libm::fabs(v - w)), h)
        }
        Pipeline::SchemeAgreement => {
            let gd = sc.data.geometric(grid)?;
            let mut cfg = sc.evolve_config(h).with_cfl(1.0);
            cfg.snapshot_every = usize::MAX;
            let a = evolve(&gd, &cfg.clone().with_scheme(Scheme::Leapfrog))?;
            let b = evolve(&gd, &cfg.with_scheme(Scheme::Characteristic))?;
            let (la, lb) = (a.last(), b.last());
            let g = *a.grid();
            norms(
                la.values
                    .iter()
                    .zip(&lb.values)
                    .enumerate()
                    .filter(|&(k, _)| within(g.coord(la.first + k), sc.r_min, sc.r_max))
                    .map(|(_, (x, y))| libm::fabs(x - y)),
                h,
            )
        }
        Pipeline::Transport => {
            let gd = sc.data.geometric(grid)?;
            let ev = evolve(&gd, &sc.evolve_config(h))?;
            let rep = transport_check(&ev, &gd);
            let worst = rep.metrics.values().copied().fold(0.0, f64::max);
            Ok(ErrorNorms { sup: worst, l1: worst, nodes: ev.levels() })
        }
    }
}
