//! Acceptance gate: every criterion runs at its full tolerance, in sequence,
//! and prints one PASS/FAIL line with its runtime. Run with
//! `cargo test -p nullsurf-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use nullsurf_core::diagnostics::{
    bootstrap_monitor, convergence_study, flatness_report, observed_order, product_l1, smallness_check,
    transport_check, DiagnosticsReport,
};
use nullsurf_core::evolution::{evolve, EvolveConfig, Scheme};
use nullsurf_core::fields::{sample, GridSpec1D, Profile, SampledFunction1D};
use nullsurf_core::initial_data::{graph_to_geometric, transport_profiles, GeometricData, GraphData, NullPair};
use nullsurf_core::reconstruction::{
    assemble_embedding, embedding_checks, graph_seed, integrate_slice_frame, EmbeddingRegion,
};
use nullsurf_core::scenario::{small_bump, travelling_wave, DataSpec, Pipeline, Scenario};
use nullsurf_core::Error;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = budget.is_none_or(|b| took < b);
    let ok = out.passed && in_time;
    let limit = budget.map(|b| format!(" limit {:.0} s", b.as_secs_f64())).unwrap_or_default();
    println!(
        "{} criterion {id} {name}: {} [{:.2} s{limit}]",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64()
    );
    ok
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn orders_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn study(sc: &Scenario, hs: &[f64]) -> Result<(Vec<f64>, nullsurf_core::diagnostics::ObservedOrder), Error> {
    let rep = convergence_study(sc, hs)?;
    let errs = rep.series["error_sup"].clone();
    let o = observed_order(hs, &errs);
    Ok((errs, o))
}

fn free_wave_data() -> DataSpec {
    DataSpec::Geometric {
        lambda0: Profile::gaussian(0.02, 1.0),
        nu0: Profile::Zero,
        psi0: Profile::gaussian(0.1, 1.0),
        psi1: Profile::GaussianDerivative { amplitude: 0.05, center: 0.5, sigma: 0.8 },
    }
}

/// d'Alembert with analytic antiderivative of ψ₁.
fn free_wave_exact(t: f64, r: f64) -> f64 {
    let p0 = Profile::gaussian(0.1, 1.0);
    let g = Profile::Gaussian { amplitude: 0.05, center: 0.5, sigma: 0.8 };
    0.5 * (p0.eval(r + t) + p0.eval(r - t)) + 0.5 * (g.eval(r + t) - g.eval(r - t))
}

/// Sup of the difference to the analytic solution over the levels stored
/// every quarter time unit, `r ∈ [−10, 10]`.
fn free_wave_analytic_error(sc: &Scenario, h: f64) -> Result<f64, Error> {
    let cfg = sc.evolve_config(h).with_snapshot_every((0.25 / h).round() as usize);
    let gd = sc.data.geometric(cfg.data_grid()?)?;
    let ev = evolve(&gd, &cfg)?;
    let g = *ev.grid();
    let mut err = 0.0f64;
    for s in ev.snapshots() {
        for (k, v) in s.values.iter().enumerate() {
            let r = g.coord(s.first + k);
            if (sc.r_min..=sc.r_max).contains(&r) {
                err = err.max((v - free_wave_exact(s.t, r)).abs());
            }
        }
    }
    Ok(err)
}

fn criterion_1() -> Outcome {
    let hs = [1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
    let mut passed = true;
    let mut detail = String::new();
    for scheme in [Scheme::Leapfrog, Scheme::Characteristic] {
        let sc =
            Scenario::new("free-wave", free_wave_data(), Pipeline::FreeWave, (-10.0, 10.0), 5.0).with_scheme(scheme);
        let errs: Result<Vec<f64>, Error> = hs.iter().map(|&h| free_wave_analytic_error(&sc, h)).collect();
        let errs = match errs {
            Ok(e) => e,
            Err(e) => {
                passed = false;
                detail += &format!("{}: {e}; ", scheme.name());
                continue;
            }
        };
        let o = observed_order(&hs, &errs);
        // an exact-to-rounding solver has no observable order; that meets
        // the criterion, and the line says so
        passed &= o.exact || (o.within(1.9, 2.1) && o.pairwise.iter().all(|p| (1.9..=2.1).contains(p)));
        let verdict =
            if o.exact { "exact to rounding".to_string() } else { format!("orders {}", orders_str(&o.pairwise)) };
        detail += &format!("{} errors vs analytic {} {verdict}; ", scheme.name(), fmt(&errs));
    }
    // snapshot cadence: levels stored every k steps plus the last
    let cfg = EvolveConfig::new(-1.0, 1.0, 1.0 / 16.0, 1.0).with_snapshot_every(3);
    let gd = GeometricData::zeros(cfg.data_grid().unwrap());
    let ev = evolve(&gd, &cfg).unwrap();
    let levels: Vec<usize> = ev.snapshots().iter().map(|s| s.level).collect();
    let cadence = levels == [0, 3, 6, 9, 12, 15, 16];
    passed &= cadence;
    detail += &format!("cadence {}", if cadence { "ok" } else { "wrong" });
    Outcome { passed, detail }
}

fn criterion_2() -> Outcome {
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let reference = travelling_wave(Pipeline::TravellingReference, 0.1, 1.0, (-10.0, 10.0), 5.0);
    let geometric = travelling_wave(Pipeline::TravellingGeometric, 0.1, 1.0, (-10.0, 10.0), 5.0);
    let mut passed = true;
    let mut detail = String::new();
    for (sc, need) in [(&reference, 1.9), (&geometric, 1.8)] {
        match study(sc, &hs) {
            Ok((errs, o)) => {
                passed &= o.at_least(need);
                detail += &format!(
                    "{} errors {} orders {} (need {need}); ",
                    sc.pipeline.name(),
                    fmt(&errs),
                    orders_str(&o.pairwise)
                );
            }
            Err(e) => {
                passed = false;
                detail += &format!("{}: {e}; ", sc.pipeline.name());
            }
        }
    }
    Outcome { passed, detail }
}

fn criterion_3() -> Outcome {
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let sc = small_bump(Pipeline::CrossPipeline, (-10.0, 10.0), 10.0);
    match study(&sc, &hs) {
        Ok((errs, o)) => Outcome {
            passed: o.at_least(1.8),
            detail: format!("sup differences {} orders {} fit {:.3}", fmt(&errs), orders_str(&o.pairwise), o.fit),
        },
        Err(e) => Outcome { passed: false, detail: e.to_string() },
    }
}

fn criterion_4() -> Outcome {
    let bump = Profile::CompactBump { amplitude: 0.05, center: 0.0, sigma: 1.0, lo: -1.0, hi: 1.0 };
    let mut passed = true;
    let mut curv = Vec::new();
    let mut source = 0.0f64;
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    for &h in &hs {
        let cfg = EvolveConfig::new(-3.0, 3.0, h, 2.0).with_cfl(0.5);
        let g = cfg.data_grid().unwrap();
        let gd = GeometricData::new(
            sample(&bump, g).unwrap(),
            sample(&bump, g).unwrap(),
            SampledFunction1D::zeros(g),
            SampledFunction1D::zeros(g),
        )
        .unwrap();
        let ev = match evolve(&gd, &cfg) {
            Ok(ev) => ev,
            Err(e) => return Outcome { passed: false, detail: e.to_string() },
        };
        // λ₀ supported in r ∈ [−1, 1] means Λ(u) = λ₀(2u) lives on u ∈ [−½, ½]
        let rep = flatness_report(&ev, &transport_profiles(&gd), ((-0.5, 0.5), (-0.5, 0.5))).unwrap();
        passed &= rep.passed();
        source = source.max(rep.get("source_sup_outside").unwrap());
        curv.push(rep.get("curvature_sup_outside").unwrap());
    }
    let o = observed_order(&hs, &curv);
    passed &= curv[2] < 1e-6 && o.at_least(1.8);
    Outcome {
        passed,
        detail: format!(
            "source outside {source:e}, curvature outside {} orders {} (need < 1e-6 at h=1/256)",
            fmt(&curv),
            orders_str(&o.pairwise)
        ),
    }
}

fn bootstrap_data(g: GridSpec1D) -> GeometricData {
    // ‖λ₀‖₁ = ‖ν₀‖₁ = 0.004, ‖ψ₀‖_∞ = 0.002, ‖ψ₀'‖₁ = 0.004, ‖ψ₁‖₁ = 0.002
    let curv = Profile::gaussian(0.004 / (2.0 * std::f64::consts::PI).sqrt(), 1.0);
    GeometricData::new(
        sample(&curv, g).unwrap(),
        sample(&curv, g).unwrap(),
        sample(&Profile::gaussian(0.002, 1.0), g).unwrap(),
        sample(&Profile::GaussianDerivative { amplitude: 0.001, center: 0.0, sigma: 1.0 }, g).unwrap(),
    )
    .unwrap()
}

fn criterion_5() -> Outcome {
    let eps = 0.01;
    let cfg = EvolveConfig::new(-10.0, 10.0, 1.0 / 128.0, 100.0).with_snapshot_every(usize::MAX);
    let gd = bootstrap_data(cfg.data_grid().unwrap());
    let small = smallness_check(&gd, eps).unwrap();
    let ev = match evolve(&gd, &cfg) {
        Ok(ev) => ev,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let rep = bootstrap_monitor(&ev, eps);
    let run = rep.series["running_sup"].last().copied().unwrap_or(f64::NAN);
    Outcome {
        passed: small.passed() && rep.passed(),
        detail: format!(
            "hypotheses {} (margins {:.2e}, {:.2e}); {} levels, max sup|psi| {run:.4e} < 3eps = 0.03; chain slack {:.3e}",
            if small.passed() { "hold" } else { "FAIL" },
            small.get("curvature_margin").unwrap(),
            small.get("conformal_margin").unwrap(),
            ev.levels(),
            rep.checks.iter().find(|c| c.name == "inequality_chain").map(|c| c.value).unwrap_or(f64::NAN)
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut passed = true;
    let mut detail = String::new();
    for scheme in [Scheme::Leapfrog, Scheme::Characteristic] {
        let cfg = EvolveConfig::new(-4.0, 4.0, 1.0 / 64.0, 3.0).with_scheme(scheme);
        let g = cfg.data_grid().unwrap();
        let gd = GeometricData::new(
            sample(&Profile::Gaussian { amplitude: 0.2, center: -0.5, sigma: 0.6 }, g).unwrap(),
            sample(&Profile::GaussianDerivative { amplitude: 0.1, center: 0.4, sigma: 0.7 }, g).unwrap(),
            sample(&Profile::gaussian(0.05, 1.0), g).unwrap(),
            SampledFunction1D::zeros(g),
        )
        .unwrap();
        let ev = evolve(&gd, &cfg).unwrap();
        let rep = transport_check(&ev, &gd);
        passed &= rep.passed();
        detail += &format!(
            "{}: dv lambda {:.1e}, du nu {:.1e}, direct {:.1e}; ",
            scheme.name(),
            rep.checks[0].value,
            rep.checks[1].value,
            rep.checks[2].value
        );
    }
    Outcome { passed, detail }
}

fn criterion_7() -> Outcome {
    let g = GridSpec1D::covering(-6.0, 6.0, 1.0 / 128.0).unwrap();
    let s = |p: Profile| sample(&p, g).unwrap();
    let pairs = [
        (s(Profile::gaussian(1.0, 1.0)), s(Profile::gaussian(0.3, 0.5))),
        (
            s(Profile::CompactBump { amplitude: 2.0, center: 0.2, sigma: 0.7, lo: -1.0, hi: 1.5 }),
            s(Profile::GaussianDerivative { amplitude: -0.4, center: 1.0, sigma: 1.3 }),
        ),
        (
            SampledFunction1D::from_fn(g, |x| (3.0 * x).sin() * (-0.1 * x * x).exp()).unwrap(),
            SampledFunction1D::from_fn(g, |x| if x.abs() < 2.0 { 1.0 - x.abs() } else { 0.0 }).unwrap(),
        ),
    ];
    let gaps: Vec<f64> = pairs.into_iter().map(|(l, v)| product_l1(&NullPair::new(l, v)).relative_gap()).collect();
    Outcome { passed: gaps.iter().all(|&x| x < 1e-12), detail: format!("relative gaps {}", fmt(&gaps)) }
}

fn embedding_report(phi0: &Profile, h: f64) -> Result<DiagnosticsReport, Error> {
    let cfg = EvolveConfig::new(-3.0, 3.0, h, 2.0);
    let g = cfg.data_grid()?;
    let data = GraphData::new(sample(phi0, g)?, SampledFunction1D::zeros(g))?;
    let gd = graph_to_geometric(&data)?;
    let ev = evolve(&gd, &cfg)?;
    let frame = integrate_slice_frame(&gd, graph_seed(&data)?)?;
    let e = assemble_embedding(&frame, EmbeddingRegion::full(&frame))?;
    Ok(embedding_checks(&e, &frame, &ev, &transport_profiles(&gd)))
}

fn criterion_8() -> Outcome {
    const METRICS: [&str; 7] =
        ["null_defect", "metric_defect", "normal_defect", "lambda_defect", "nu_defect", "trace_defect", "mixed_defect"];
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let reps: Result<Vec<_>, _> = hs.iter().map(|&h| embedding_report(&Profile::gaussian(0.05, 1.0), h)).collect();
    let reps = match reps {
        Ok(r) => r,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let mut passed = true;
    let mut detail = String::new();
    for m in METRICS {
        let errs: Vec<f64> = reps.iter().map(|r| r.get(m).unwrap()).collect();
        let o = observed_order(&hs, &errs);
        passed &= o.at_least(1.8);
        if o.exact {
            detail += &format!("{m} exact (max {:.1e}); ", errs.iter().copied().fold(0.0, f64::max));
        } else {
            detail += &format!("{m} orders {}; ", orders_str(&o.pairwise));
        }
    }
    match embedding_report(&Profile::Zero, 1.0 / 32.0) {
        Ok(flat) => {
            let worst = METRICS.iter().map(|m| flat.get(m).unwrap()).fold(0.0, f64::max);
            passed &= worst < 1e-12;
            detail += &format!("flat worst {worst:.1e}");
        }
        Err(e) => {
            passed = false;
            detail += &e.to_string();
        }
    }
    Outcome { passed, detail }
}

fn criterion_9() -> Outcome {
    let cfg = EvolveConfig::new(-5.0, 5.0, 1.0 / 32.0, 20.0).with_snapshot_every(usize::MAX);
    let g = cfg.data_grid().unwrap();
    let big = Profile::gaussian(5.0, 1.0);
    let gd = GeometricData::new(
        sample(&big, g).unwrap(),
        sample(&big, g).unwrap(),
        SampledFunction1D::zeros(g),
        SampledFunction1D::zeros(g),
    )
    .unwrap();
    // the smallest ε the data could claim
    let probe = smallness_check(&gd, 1.0).unwrap();
    let eps = (probe.get("l1_lambda0").unwrap() + probe.get("l1_nu0").unwrap())
        .max(probe.get("linf_psi0").unwrap() + probe.get("l1_dr_psi0").unwrap() + probe.get("l1_psi1").unwrap());
    match evolve(&gd, &cfg) {
        Err(Error::BlowUp { t, r, psi }) => Outcome {
            passed: t < 20.0,
            detail: format!("blow-up guard fired at t = {t:.4}, r = {r:.4}, psi = {psi:.3e}"),
        },
        Err(e) => Outcome { passed: false, detail: format!("unexpected error {e}") },
        Ok(ev) => {
            let rep = bootstrap_monitor(&ev, eps);
            let t = rep.get("first_violation_t");
            Outcome {
                passed: t.is_some_and(|t| t < 20.0),
                detail: format!("eps {eps:.3}, bootstrap violation at {t:?}"),
            }
        }
    }
}

#[test]
fn acceptance() {
    let started = Instant::now();
    let secs = Duration::from_secs;
    let results = [
        run(1, "free-wave exactness", Some(secs(10)), criterion_1),
        run(2, "travelling-wave oracle", Some(secs(30)), criterion_2),
        run(3, "cross-pipeline equivalence", None, criterion_3),
        run(4, "flatness outside the diamond", None, criterion_4),
        run(5, "bootstrap bound", Some(secs(120)), criterion_5),
        run(6, "exact transport", None, criterion_6),
        run(7, "product factorization", None, criterion_7),
        run(8, "reconstruction fidelity", None, criterion_8),
        run(9, "negative control", None, criterion_9),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    println!("acceptance: {}/9 passed in {:.1} s", 9 - failed.len(), started.elapsed().as_secs_f64());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
