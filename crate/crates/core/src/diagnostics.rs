//! Measurable versions of the small-data theory: smallness of the data, the
//! bootstrap bound on `ψ`, flatness outside the interaction diamond, the
//! product structure of `‖λν‖_{L¹}`, and convergence studies.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::evolution::Evolution;
use crate::fields::{derivative, norm_l1, norm_linf, SampledFunction1D};
use crate::initial_data::{GeometricData, NullPair};
use crate::lattice::Field2D;
use crate::scenario::{scenario_error, Scenario};
use crate::{Error, Result};

/// How a check compares its metric with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `value < tolerance`
    Below,
    /// `value ≤ tolerance`
    AtMost,
    /// `value ≥ tolerance`
    AtLeast,
}

impl Comparison {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparison::Below => "<",
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        }
    }
}

/// A pass/fail flag tied to a recorded metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

/// Named metrics, pass/fail checks and provenance of one diagnostic run.
///
/// Every check refers to a metric stored in the same report, so a reader can
/// always see the number that was compared and the tolerance it was held to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub title: String,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub provenance: BTreeMap<String, String>,
}

impl DiagnosticsReport {
    pub fn new(title: &str) -> Self {
        Self { title: title.to_string(), ..Self::default() }
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn series(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.series.insert(name.to_string(), values);
        self
    }

    pub fn provenance(&mut self, key: &str, value: &str) -> &mut Self {
        self.provenance.insert(key.to_string(), value.to_string());
        self
    }

    /// Records `metric` (if not present yet) and a check on it.
    pub fn check(&mut self, name: &str, metric: &str, value: f64, cmp: Comparison, tolerance: f64) -> bool {
        self.metrics.entry(metric.to_string()).or_insert(value);
        let passed = match cmp {
            Comparison::Below => value < tolerance,
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
        };
        self.checks.push(Check {
            name: name.to_string(),
            metric: metric.to_string(),
            value,
            tolerance,
            comparison: cmp,
            passed,
        });
        passed
    }

    pub fn check_below(&mut self, name: &str, metric: &str, value: f64, tolerance: f64) -> bool {
        self.check(name, metric, value, Comparison::Below, tolerance)
    }

    pub fn check_at_least(&mut self, name: &str, metric: &str, value: f64, tolerance: f64) -> bool {
        self.check(name, metric, value, Comparison::AtLeast, tolerance)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Absorbs another report, prefixing its names with `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: DiagnosticsReport) {
        let key = |k: &str| alloc::format!("{prefix}.{k}");
        for (k, v) in other.metrics {
            self.metrics.insert(key(&k), v);
        }
        for (k, v) in other.series {
            self.series.insert(key(&k), v);
        }
        for (k, v) in other.provenance {
            self.provenance.entry(k).or_insert(v);
        }
        for mut c in other.checks {
            c.name = key(&c.name);
            c.metric = key(&c.metric);
            self.checks.push(c);
        }
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn trapezoid_weights(n: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i == 0 || i + 1 == n { 0.5 * h } else { h })
}

/// Both smallness hypotheses for small-data global existence:
/// `‖λ₀‖₁ + ‖ν₀‖₁ ≤ ε` and `‖ψ₀‖_∞ + ‖∂_rψ₀‖₁ + ‖ψ₁‖₁ < ε`.
pub fn smallness_check(gd: &GeometricData, eps: f64) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("smallness");
    let l1_lambda = norm_l1(&gd.lambda0);
    let l1_nu = norm_l1(&gd.nu0);
    let curvature = l1_lambda + l1_nu;
    let linf_psi0 = norm_linf(&gd.psi0);
    let l1_dpsi0 = norm_l1(&derivative(&gd.psi0)?);
    let l1_psi1 = norm_l1(&gd.psi1);
    let conformal = linf_psi0 + l1_dpsi0 + l1_psi1;
    rep.metric("epsilon", eps)
        .metric("l1_lambda0", l1_lambda)
        .metric("l1_nu0", l1_nu)
        .metric("linf_psi0", linf_psi0)
        .metric("l1_dr_psi0", l1_dpsi0)
        .metric("l1_psi1", l1_psi1)
        .metric("curvature_margin", eps - curvature)
        .metric("conformal_margin", eps - conformal);
    rep.check("curvature_hypothesis", "curvature_norm", curvature, Comparison::AtMost, eps);
    rep.check_below("conformal_hypothesis", "conformal_norm", conformal, eps);
    Ok(rep)
}

/// `∫|Λ| du`, `∫|V| dv` and their product, with the double integral done
/// separately as a check on the factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductL1 {
    pub l1_u: f64,
    pub l1_v: f64,
    /// `(∫|Λ|du)(∫|V|dv)`, the `L¹_{u,v}` norm of `λν`.
    pub product: f64,
    /// The same norm from the 2D trapezoidal sum of `|Λ(u_i) V(v_k)|`.
    pub double_integral: f64,
    /// `L¹_{t,r}` norm: `dr dt = 2 du dv`.
    pub product_tr: f64,
}

impl ProductL1 {
    pub fn relative_gap(&self) -> f64 {
        if self.product == 0.0 {
            libm::fabs(self.double_integral)
        } else {
            libm::fabs(self.double_integral - self.product) / self.product
        }
    }
}

pub fn product_l1(np: &NullPair) -> ProductL1 {
    let (l, v) = (np.lambda(), np.nu());
    let l1_u = norm_l1(l);
    let l1_v = norm_l1(v);
    let wl: Vec<f64> =
        trapezoid_weights(l.len(), l.grid().spacing()).zip(l.values()).map(|(w, x)| w * libm::fabs(*x)).collect();
    let wv: Vec<f64> =
        trapezoid_weights(v.len(), v.grid().spacing()).zip(v.values()).map(|(w, x)| w * libm::fabs(*x)).collect();
    let double_integral =
        compensated_sum(wl.iter().map(|&a| if a == 0.0 { 0.0 } else { compensated_sum(wv.iter().map(|&b| a * b)) }));
    let product = l1_u * l1_v;
    ProductL1 { l1_u, l1_v, product, double_integral, product_tr: 2.0 * product }
}

pub fn product_l1_report(np: &NullPair) -> DiagnosticsReport {
    let p = product_l1(np);
    let mut rep = DiagnosticsReport::new("product_l1");
    rep.metric("l1_u", p.l1_u)
        .metric("l1_v", p.l1_v)
        .metric("product_uv", p.product)
        .metric("double_integral_uv", p.double_integral)
        .metric("product_tr", p.product_tr);
    rep.check_below("fubini_factorization", "relative_gap", p.relative_gap(), 1e-12);
    rep
}

/// Running `sup|ψ|` against `3ε`, plus the a priori chain
/// `sup|ψ(t_{n+1})| ≤ ε + e^{sup_{s ≤ t_n}|ψ|} ‖λν‖_{L¹_{u,v}}`.
pub fn bootstrap_monitor(ev: &Evolution, eps: f64) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("bootstrap");
    let prod = product_l1(ev.null_pair()).product;
    let sups = ev.level_sup();
    let mut running = Vec::with_capacity(sups.len());
    let mut bound = Vec::with_capacity(sups.len());
    let mut run = 0.0f64;
    for &s in sups {
        run = run.max(s);
        running.push(run);
        bound.push(eps + libm::exp(run) * prod);
    }
    // smallest slack of the chain over all steps
    let chain = (0..sups.len().saturating_sub(1)).map(|n| bound[n] - sups[n + 1]).fold(f64::INFINITY, f64::min);
    let first_violation = running.iter().position(|&r| r >= 3.0 * eps);
    rep.metric("epsilon", eps)
        .metric("product_l1_uv", prod)
        .metric("levels", sups.len() as f64)
        .metric("t_final", ev.t_final())
        .metric("final_bound", bound.last().copied().unwrap_or(eps));
    if let Some(n) = first_violation {
        rep.metric("first_violation_t", n as f64 * ev.dt());
    }
    rep.check_below("bootstrap_3eps", "max_sup_psi", run, 3.0 * eps);
    rep.check("inequality_chain", "chain_slack", chain, Comparison::AtLeast, 0.0);
    rep.series("level_sup", sups.to_vec()).series("running_sup", running).series("bound", bound);
    rep.provenance("scheme", ev.scheme().name());
    rep
}

/// Flatness outside the interaction diamond `u ∈ I_u`, `v ∈ I_v`.
///
/// The source is checked on every stored trusted node outside the diamond
/// (it must vanish exactly). Off-node lookups interpolate linearly, so the
/// diamond is widened by one profile cell on each side. Curvature `K = −e^{−ψ}(ψ_rr − ψ_tt)` is
/// recomputed with centered differences of equal step `h` in `r` and `t`;
/// only nodes whose whole stencil lies outside the diamond count.
pub fn flatness_report(ev: &Evolution, np: &NullPair, supports: ((f64, f64), (f64, f64))) -> Result<DiagnosticsReport> {
    let ((ulo, uhi), (vlo, vhi)) = supports;
    let check_support = |f: &SampledFunction1D, lo: f64, hi: f64, name: &str| -> Result<()> {
        if let Some((a, b)) = f.support() {
            let tol = 1e-12 * (1.0 + libm::fabs(lo) + libm::fabs(hi));
            if a < lo - tol || b > hi + tol {
                return Err(Error::InvalidInput(alloc::format!(
                    "{name} is sampled nonzero on [{a}, {b}], outside the stated support [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    };
    check_support(np.lambda(), ulo, uhi, "Lambda")?;
    check_support(np.nu(), vlo, vhi, "V")?;

    let (du, dv) = (np.lambda().grid().spacing(), np.nu().grid().spacing());
    let ((ulo, uhi), (vlo, vhi)) = ((ulo - du, uhi + du), (vlo - dv, vhi + dv));
    let outside = |t: f64, r: f64| {
        let (u, v) = (0.5 * (r + t), 0.5 * (r - t));
        u < ulo || u > uhi || v < vlo || v > vhi
    };
    let g = ev.grid();
    let h = g.spacing();
    let mut source_sup = 0.0f64;
    let mut nodes = 0usize;
    for s in ev.snapshots() {
        for k in 0..s.values.len() {
            let r = g.coord(s.first + k);
            if outside(s.t, r) {
                nodes += 1;
                source_sup = source_sup.max(libm::fabs(np.source_at(s.t, r).unwrap_or(0.0)));
            }
        }
    }

    let stride = libm::round(h / ev.dt()) as usize;
    let mut curv = 0.0f64;
    let mut curv_nodes = 0usize;
    if stride >= 1 && libm::fabs(stride as f64 * ev.dt() - h) < 1e-9 * h {
        for s in ev.snapshots() {
            let n = s.level;
            let (Some(lo), Some(hi)) = (n.checked_sub(stride).and_then(|m| ev.snapshot(m)), ev.snapshot(n + stride))
            else {
                continue;
            };
            for k in 1..s.values.len().saturating_sub(1) {
                let j = s.first + k;
                let r = g.coord(j);
                let stencil = [(s.t, r), (s.t, r - h), (s.t, r + h), (s.t - h, r), (s.t + h, r)];
                if !stencil.iter().all(|&(t, r)| outside(t, r)) {
                    continue;
                }
                let (Some(a), Some(b)) = (lo.get(j), hi.get(j)) else { continue };
                let c = s.values[k];
                let wave = (s.values[k + 1] - 2.0 * c + s.values[k - 1] - (b - 2.0 * c + a)) / (h * h);
                curv = curv.max(libm::fabs(crate::geometry::gaussian_curvature_from_wave(c, wave)));
                curv_nodes += 1;
            }
        }
    }
    let mut rep = DiagnosticsReport::new("flatness");
    rep.metric("nodes_outside", nodes as f64)
        .metric("curvature_nodes", curv_nodes as f64)
        .metric("h", h)
        .metric("dt", ev.dt());
    rep.check("source_vanishes_outside", "source_sup_outside", source_sup, Comparison::AtMost, 0.0);
    rep.metric("curvature_sup_outside", curv);
    Ok(rep)
}

/// Exact-transport check on the assembled null components.
///
/// On every stored level with both neighbours one `h` away in time, the
/// centered derivative of `λ` along `∂_v` (the step `(t+h, r−h)` against
/// `(t−h, r+h)`) and of `ν` along `∂_u` are measured, together with the
/// direct mismatch `λ(t,r) − λ₀(r+t)`, `ν(t,r) − ν₀(r−t)`. Values are
/// relative to the largest `|λ₀|`, `|ν₀|`.
pub fn transport_check(ev: &Evolution, gd: &GeometricData) -> DiagnosticsReport {
    let np = ev.null_pair();
    let g = ev.grid();
    let h = g.spacing();
    let scale_l = norm_linf(&gd.lambda0).max(f64::MIN_POSITIVE);
    let scale_n = norm_linf(&gd.nu0).max(f64::MIN_POSITIVE);
    let mut dv_lambda = 0.0f64;
    let mut du_nu = 0.0f64;
    let mut direct = 0.0f64;
    let stride = libm::round(h / ev.dt()).max(1.0) as usize;
    let trusted = ev.trusted();
    for s in ev.snapshots() {
        if s.level < stride || ev.snapshot(s.level + stride).is_none() {
            continue;
        }
        let t = s.t;
        for k in 1..s.values.len().saturating_sub(1) {
            let r = g.coord(s.first + k);
            if !trusted.contains(t + h, r + h) || !trusted.contains(t - h, r - h) {
                continue;
            }
            let l = |t: f64, r: f64| np.lambda_at(t, r).unwrap_or(f64::NAN);
            let n = |t: f64, r: f64| np.nu_at(t, r).unwrap_or(f64::NAN);
            dv_lambda = dv_lambda.max(libm::fabs(l(t + h, r - h) - l(t - h, r + h)) / (2.0 * h) / scale_l);
            du_nu = du_nu.max(libm::fabs(n(t + h, r + h) - n(t - h, r - h)) / (2.0 * h) / scale_n);
            if let (Some(a), Some(b)) = (gd.lambda0.interpolate(r + t), gd.nu0.interpolate(r - t)) {
                direct = direct.max(libm::fabs(l(t, r) - a) / scale_l).max(libm::fabs(n(t, r) - b) / scale_n);
            }
        }
    }
    let mut rep = DiagnosticsReport::new("transport");
    rep.check_below("dv_lambda_vanishes", "dv_lambda_rel", dv_lambda, 1e-13);
    rep.check_below("du_nu_vanishes", "du_nu_rel", du_nu, 1e-13);
    rep.check_below("matches_initial_profiles", "direct_rel", direct, 1e-13);
    rep
}

/// Difference norms between two lattice fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub sup: f64,
    /// Space-time (or space, for single-level fields) `L¹` by node weights.
    pub l1: f64,
    pub nodes: usize,
}

/// Rectangle `t ∈ [t.0, t.1]`, `r ∈ [r.0, r.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region2D {
    pub t: (f64, f64),
    pub r: (f64, f64),
}

fn bilinear(f: &Field2D, t: f64, r: f64) -> Option<f64> {
    let g = f.r_grid();
    let tol = 1e-9;
    let pr = g.position(r);
    if pr < -tol || pr > (g.count() - 1) as f64 + tol {
        return None;
    }
    let pt = if f.levels() == 1 { 0.0 } else { (t - f.t0()) / f.dt() };
    if pt < -tol || pt > (f.levels() - 1) as f64 + tol {
        return None;
    }
    let lin = |p: f64, n: usize| -> (usize, f64) {
        if n == 1 {
            return (0, 0.0);
        }
        let i = (libm::floor(p).max(0.0) as usize).min(n - 2);
        (i, (p - i as f64).clamp(0.0, 1.0))
    };
    let (j, a) = lin(pr, g.count());
    let (n, b) = lin(pt, f.levels());
    let at = |n: usize, j: usize| f.get(n.min(f.levels() - 1), j.min(g.count() - 1));
    let row = |n: usize| (1.0 - a) * at(n, j) + a * at(n, j + 1);
    Some((1.0 - b) * row(n) + b * row(n + 1))
}

/// `a − b` on `a`'s nodes inside `region`, with `b` interpolated
/// bilinearly; nodes where `b` is unavailable are skipped.
pub fn compare_solutions(a: &Field2D, b: &Field2D, region: Region2D) -> Result<ErrorNorms> {
    let ga = a.r_grid();
    let mut sup = 0.0f64;
    let mut l1 = 0.0;
    let mut nodes = 0;
    let wt = if a.levels() > 1 { a.dt() } else { 1.0 };
    let tol = 1e-12;
    for n in 0..a.levels() {
        let t = a.t(n);
        if t < region.t.0 - tol || t > region.t.1 + tol {
            continue;
        }
        for j in 0..ga.count() {
            let r = ga.coord(j);
            if r < region.r.0 - tol || r > region.r.1 + tol {
                continue;
            }
            if let Some(vb) = bilinear(b, t, r) {
                let d = libm::fabs(a.get(n, j) - vb);
                sup = sup.max(d);
                l1 += d * ga.spacing() * wt;
                nodes += 1;
            }
        }
    }
    if nodes == 0 {
        return Err(Error::InvalidInput("the fields share no nodes inside the region".into()));
    }
    Ok(ErrorNorms { sup, l1, nodes })
}

/// Errors below this are treated as rounding and reported as "exact".
pub const EXACT_FLOOR: f64 = 1e-11;

/// Observed convergence orders from errors at halving steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedOrder {
    /// `log₂(e_k / e_{k+1})` for consecutive resolutions.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `log e` against `log h`.
    pub fit: f64,
    /// Every error sits at rounding level, so no order can be observed.
    pub exact: bool,
}

impl ObservedOrder {
    pub fn at_least(&self, p: f64) -> bool {
        self.exact || (self.fit >= p && self.pairwise.iter().all(|&q| q >= p))
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.exact || (lo..=hi).contains(&self.fit)
    }
}

pub fn observed_order(hs: &[f64], errors: &[f64]) -> ObservedOrder {
    let exact = errors.iter().all(|&e| e < EXACT_FLOOR);
    let pairwise = errors.windows(2).map(|w| libm::log2(w[0] / w[1])).collect();
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|&h| libm::log(h)).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| libm::log(e.max(f64::MIN_POSITIVE))).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    ObservedOrder { pairwise, fit: sxy / sxx, exact }
}

/// Runs `scenario` at each step in `resolutions` and reports errors and
/// observed orders; passes at observed order 1.8 or errors at rounding.
pub fn convergence_study(scenario: &Scenario, resolutions: &[f64]) -> Result<DiagnosticsReport> {
    convergence_study_with(scenario, resolutions, 1.8)
}

/// [`convergence_study`] with the required order given.
pub fn convergence_study_with(scenario: &Scenario, resolutions: &[f64], min_order: f64) -> Result<DiagnosticsReport> {
    if resolutions.len() < 3 {
        return Err(Error::Config("a convergence study needs at least three resolutions".into()));
    }
    for w in resolutions.windows(2) {
        if libm::fabs(w[1] * 2.0 - w[0]) > 1e-12 * w[0] {
            return Err(Error::Config(alloc::format!("resolutions must halve: {} is not half of {}", w[1], w[0])));
        }
    }
    let mut rep = DiagnosticsReport::new("convergence");
    rep.provenance("scenario", &scenario.name).provenance("pipeline", scenario.pipeline.name());
    let mut sups = Vec::new();
    let mut l1s = Vec::new();
    for (k, &h) in resolutions.iter().enumerate() {
        let e = scenario_error(scenario, h)?;
        rep.metric(&alloc::format!("h_{k}"), h)
            .metric(&alloc::format!("error_sup_{k}"), e.sup)
            .metric(&alloc::format!("error_l1_{k}"), e.l1);
        sups.push(e.sup);
        l1s.push(e.l1);
    }
    let o = observed_order(resolutions, &sups);
    let o1 = observed_order(resolutions, &l1s);
    for (k, p) in o.pairwise.iter().enumerate() {
        rep.metric(&alloc::format!("order_sup_{k}"), *p);
    }
    rep.metric("order_sup_fit", o.fit).metric("order_l1_fit", o1.fit).metric("exact", if o.exact { 1.0 } else { 0.0 });
    rep.series("error_sup", sups).series("error_l1", l1s).series("h", resolutions.to_vec());
    if o.exact {
        let worst = rep.series["error_sup"].iter().copied().fold(0.0, f64::max);
        rep.check_below("errors_at_rounding", "max_error_sup", worst, EXACT_FLOOR);
    } else {
        rep.check_at_least(
            "second_order",
            "order_sup_min",
            o.pairwise.iter().copied().fold(o.fit, f64::min),
            min_order,
        );
    }
    Ok(rep)
}
