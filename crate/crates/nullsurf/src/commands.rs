//! One function per subcommand. Each writes its files into `out` and
//! returns the summary lines and whether every check passed.

use std::path::Path;

use nullsurf_core::diagnostics::{
    bootstrap_monitor, convergence_study_with, flatness_report, smallness_check, transport_check, DiagnosticsReport,
};
use nullsurf_core::evolution::{evolve, Evolution};
use nullsurf_core::fields::GridSpec1D;
use nullsurf_core::initial_data::{graph_to_geometric, transport_profiles, validate_timelike, GeometricData};
use nullsurf_core::reconstruction::{
    assemble_embedding, canonical_seed, embedding_checks, graph_seed, integrate_slice_frame, regraph, EmbeddingRegion,
};
use nullsurf_core::scenario::{DataSpec, Pipeline};
use serde_json::json;

use crate::config::ScenarioConfig;
use crate::io::{write_json, write_report, write_sampled, CsvOut};
use crate::CliError;

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    /// False when a verification check failed (exit code 5).
    pub passed: bool,
}

impl Outcome {
    fn ok(lines: Vec<String>) -> Self {
        Self { lines, passed: true }
    }
}

fn grid_json(g: &GridSpec1D) -> serde_json::Value {
    json!({ "origin": g.origin(), "spacing": g.spacing(), "count": g.count() })
}

fn provenance(rep: &mut DiagnosticsReport, cfg: &ScenarioConfig) {
    rep.provenance("config_hash", &cfg.hash)
        .provenance("scenario", &cfg.name)
        .provenance("scheme", cfg.scheme.name())
        .provenance("h", &format!("{:e}", cfg.h))
        .provenance("r_interval", &format!("[{:e}, {:e}]", cfg.r_min, cfg.r_max))
        .provenance("t_final", &format!("{:e}", cfg.t_final));
}

fn geometric_data(cfg: &ScenarioConfig) -> Result<GeometricData, CliError> {
    Ok(cfg.data.geometric(cfg.evolve_config().data_grid()?)?)
}

fn check_lines(rep: &DiagnosticsReport) -> Vec<String> {
    rep.checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {} = {:e} {} {:e}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.metric,
                c.value,
                c.comparison.symbol(),
                c.tolerance
            )
        })
        .collect()
}

/// Graph data to null-gauge data on the padded evolution grid.
pub fn convert(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    if !cfg.data.is_graph() {
        return Err(CliError::Usage("convert needs a [graph] block".into()));
    }
    let grid = cfg.evolve_config().data_grid()?;
    let graph = cfg.data.graph(grid)?;
    let min_radicand = validate_timelike(&graph)?;
    let gd = graph_to_geometric(&graph)?;
    for (name, f) in [("lambda0", &gd.lambda0), ("nu0", &gd.nu0), ("psi0", &gd.psi0), ("psi1", &gd.psi1)] {
        write_sampled(&out.join(format!("{name}.csv")), "r", name, f)?;
    }
    write_json(
        &out.join("provenance.json"),
        &json!({
            "command": "convert",
            "config_hash": cfg.hash,
            "scenario": cfg.name,
            "grid": grid_json(&grid),
            "min_radicand": min_radicand,
            "files": ["lambda0.csv", "nu0.csv", "psi0.csv", "psi1.csv"],
        }),
    )?;
    Ok(Outcome::ok(vec![format!(
        "converted {} nodes on [{}, {}], min radicand {min_radicand:e}",
        grid.count(),
        grid.origin(),
        grid.end()
    )]))
}

fn write_snapshots(path: &Path, ev: &Evolution) -> Result<(), CliError> {
    let mut out = CsvOut::create(path, &["t", "r", "psi", "lambda", "nu", "source"])?;
    let np = ev.null_pair();
    let g = ev.grid();
    for s in ev.snapshots() {
        for (k, &psi) in s.values.iter().enumerate() {
            let r = g.coord(s.first + k);
            let l = np.lambda_at(s.t, r).unwrap_or(f64::NAN);
            let n = np.nu_at(s.t, r).unwrap_or(f64::NAN);
            out.row(&[s.t, r, psi, l, n, np.source_at(s.t, r).unwrap_or(f64::NAN)])?;
        }
    }
    out.finish()
}

/// Monitors that `evolve` and `verify` share.
fn evolution_report(cfg: &ScenarioConfig, gd: &GeometricData, ev: &Evolution) -> Result<DiagnosticsReport, CliError> {
    let mut rep = DiagnosticsReport::new("evolve");
    rep.metric("levels", ev.levels() as f64)
        .metric("dt", ev.dt())
        .metric("sup_psi_final", ev.level_sup().last().copied().unwrap_or(0.0));
    rep.merge("transport", transport_check(ev, gd));
    if let Some(eps) = cfg.epsilon {
        rep.merge("smallness", smallness_check(gd, eps)?);
        rep.merge("bootstrap", bootstrap_monitor(ev, eps));
    }
    if let Some(supports) = cfg.flatness {
        rep.merge("flatness", flatness_report(ev, ev.null_pair(), supports)?);
    }
    provenance(&mut rep, cfg);
    Ok(rep)
}

pub fn evolve_cmd(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let gd = geometric_data(cfg)?;
    let ev = evolve(&gd, &cfg.evolve_config())?;
    write_snapshots(&out.join("snapshots.csv"), &ev)?;
    let rep = evolution_report(cfg, &gd, &ev)?;
    write_report(&out.join("evolve.json"), &rep)?;
    let mut lines = vec![format!(
        "{} steps of {} (dt {:e}), {} snapshots, final sup|psi| {:e}",
        ev.levels() - 1,
        ev.scheme().name(),
        ev.dt(),
        ev.snapshots().len(),
        rep.get("sup_psi_final").unwrap_or(0.0)
    )];
    lines.extend(check_lines(&rep));
    Ok(Outcome::ok(lines))
}

pub fn reconstruct(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = cfg.evolve_config().data_grid()?;
    let (gd, seed) = match &cfg.data {
        DataSpec::Graph { .. } => {
            let graph = cfg.data.graph(grid)?;
            (graph_to_geometric(&graph)?, graph_seed(&graph)?)
        }
        DataSpec::Geometric { .. } => {
            let gd = cfg.data.geometric(grid)?;
            let seed = canonical_seed(grid.origin(), gd.psi0.values()[0]);
            (gd, seed)
        }
    };
    let ev = evolve(&gd, &cfg.evolve_config())?;
    let frame = integrate_slice_frame(&gd, seed)?;
    let e = assemble_embedding(&frame, EmbeddingRegion::full(&frame))?;

    let mut csv = CsvOut::create(&out.join("embedding.csv"), &["u", "v", "t", "r", "x0", "x1", "x2"])?;
    let ((ulo, uhi), (vlo, vhi)) = (e.u_range(), e.v_range());
    let eg = *e.grid();
    let stride = cfg.embedding_stride.unwrap_or(((uhi - ulo).max(vhi - vlo) / 256).max(1));
    for i in (ulo..=uhi).step_by(stride) {
        for k in (vlo..=vhi).step_by(stride) {
            let p = e.point(i, k)?;
            let (t, r) = e.tr(i, k);
            csv.row(&[eg.coord(i), eg.coord(k), t, r, p.0[0], p.0[1], p.0[2]])?;
        }
    }
    csv.finish()?;

    let mut lines = Vec::new();
    if cfg.data.is_graph() {
        let xs: Vec<(f64, f64)> =
            GridSpec1D::covering(cfg.r_min, cfg.r_max, cfg.h)?.coords().map(|x| (cfg.t_final, x)).collect();
        let rg = regraph(&e, &xs);
        let mut csv = CsvOut::create(&out.join("regraph.csv"), &["t", "x", "phi"])?;
        for ((t, x), (&z, &found)) in xs.iter().zip(rg.values.iter().zip(&rg.mask)) {
            if found {
                csv.row(&[*t, *x, z])?;
            }
        }
        csv.finish()?;
        let found = rg.mask.iter().filter(|&&m| m).count();
        lines.push(format!("regraphed {found}/{} points at t = {}", xs.len(), cfg.t_final));
    }

    let mut rep = embedding_checks(&e, &frame, &ev, &transport_profiles(&gd));
    rep.metric("frame_max_defect", frame.max_defect());
    provenance(&mut rep, cfg);
    write_report(&out.join("reconstruct.json"), &rep)?;
    lines.insert(
        0,
        format!(
            "embedding on {}x{} nodes, frame defect {:e}, metric defect {:e}",
            uhi - ulo + 1,
            vhi - vlo + 1,
            frame.max_defect(),
            rep.get("metric_defect").unwrap_or(f64::NAN)
        ),
    );
    Ok(Outcome::ok(lines))
}

fn convergence_report(cfg: &ScenarioConfig, pipeline: Pipeline) -> Result<DiagnosticsReport, CliError> {
    let mut sc = cfg.scenario();
    sc.pipeline = pipeline;
    Ok(convergence_study_with(&sc, &cfg.resolutions, cfg.order_tolerance)?)
}

fn write_convergence_csv(path: &Path, rep: &DiagnosticsReport) -> Result<(), CliError> {
    let (hs, sup, l1) = (&rep.series["h"], &rep.series["error_sup"], &rep.series["error_l1"]);
    let mut csv = CsvOut::create(path, &["h", "error_sup", "error_l1", "order_sup"])?;
    for k in 0..hs.len() {
        let order = if k == 0 { f64::NAN } else { (sup[k - 1] / sup[k]).log2() };
        csv.row(&[hs[k], sup[k], l1[k], order])?;
    }
    csv.finish()
}

pub fn convergence(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut rep = convergence_report(cfg, cfg.pipeline)?;
    provenance(&mut rep, cfg);
    write_convergence_csv(&out.join("convergence.csv"), &rep)?;
    write_report(&out.join("convergence.json"), &rep)?;
    let mut lines: Vec<String> = rep.series["h"]
        .iter()
        .zip(&rep.series["error_sup"])
        .map(|(h, e)| format!("h = {h:e}: sup error {e:e}"))
        .collect();
    lines.push(format!("{}: fitted order {:.3}", cfg.pipeline.name(), rep.get("order_sup_fit").unwrap_or(f64::NAN)));
    lines.extend(check_lines(&rep));
    Ok(Outcome { lines, passed: rep.passed() })
}

/// Convergence, evolution monitors and, for graph data, the cross-pipeline
/// study, as one report.
pub fn verify(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut rep = DiagnosticsReport::new("verify");
    rep.merge("convergence", convergence_report(cfg, cfg.pipeline)?);
    if cfg.data.is_graph() && cfg.pipeline != Pipeline::CrossPipeline {
        rep.merge("cross_pipeline", convergence_report(cfg, Pipeline::CrossPipeline)?);
    }
    let gd = geometric_data(cfg)?;
    let ev = evolve(&gd, &cfg.evolve_config())?;
    rep.merge("evolve", evolution_report(cfg, &gd, &ev)?);
    provenance(&mut rep, cfg);
    write_report(&out.join("verify.json"), &rep)?;
    let mut lines = check_lines(&rep);
    lines.push(format!("verify: {}", if rep.passed() { "all checks passed" } else { "FAILED" }));
    Ok(Outcome { lines, passed: rep.passed() })
}
