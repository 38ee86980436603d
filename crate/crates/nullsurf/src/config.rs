//! Scenario configuration files.
//!
//! Line-oriented UTF-8, one `key = value` per line under `[section]`
//! headers. `#` starts a comment, either on its own line or after a value.
//! Numbers may be written as fractions (`h = 1/128`), lists are
//! comma-separated. Keys are unique within a section.
//!
//! ```text
//! [grid]
//! r_min = -10
//! r_max = 10
//! h = 1/128
//! t_final = 5
//! cfl = 1                # ψ-evolution Courant number
//! scheme = leapfrog      # or characteristic
//! snapshot_every = 16
//!
//! [graph]                # or [geometric] with lambda0, nu0, psi0, psi1
//! phi0 = gaussian(amplitude = 0.05, sigma = 1)
//! phi1 = zero
//!
//! [pipeline]
//! name = cross-pipeline
//! resolutions = 1/16, 1/32, 1/64
//! graph_cfl = 0.5
//!
//! [diagnostics]
//! epsilon = 0.01
//! flatness_u = -0.5, 0.5
//! flatness_v = -0.5, 0.5
//!
//! [output]
//! embedding_stride = 4
//!
//! [tolerances]
//! order = 1.8
//! ```
//!
//! Profiles: `zero`, `constant(value)`, `gaussian(amplitude, center, sigma)`,
//! `gaussian-derivative(amplitude, center, sigma)`,
//! `compact-bump(amplitude, center, sigma, lo, hi)` and `file(path)`, where
//! the file is a two-column CSV (`x,value`) on a uniform grid, relative to
//! the config file. `center` defaults to 0.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use nullsurf_core::evolution::{EvolveConfig, Scheme};
use nullsurf_core::fields::Profile;
use nullsurf_core::scenario::{DataSpec, Pipeline, Scenario};
use sha2::{Digest, Sha256};

use crate::io::read_profile_csv;
use crate::CliError;

type Section = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub data: DataSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub h: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    pub snapshot_every: usize,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub pipeline: Pipeline,
    pub resolutions: Vec<f64>,
    pub graph_cfl: f64,
    pub sample_dt: f64,
    pub epsilon: Option<f64>,
    pub flatness: Option<((f64, f64), (f64, f64))>,
    /// Node stride of the embedding CSV; by default about 256 samples per axis.
    pub embedding_stride: Option<usize>,
    pub order_tolerance: f64,
    /// SHA-256 of the config text, hex.
    pub hash: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("scenario", &["name"]),
    ("grid", &["r_min", "r_max", "h", "t_final", "cfl", "scheme", "snapshot_every", "picard_tol", "picard_max_iters"]),
    ("graph", &["phi0", "phi1"]),
    ("geometric", &["lambda0", "nu0", "psi0", "psi1"]),
    ("pipeline", &["name", "resolutions", "graph_cfl", "sample_dt"]),
    ("diagnostics", &["epsilon", "flatness_u", "flatness_v"]),
    ("output", &["embedding_stride"]),
    ("tolerances", &["order"]),
];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// rust-ini only knows whole-line comments, so `#` tails are cut first.
fn strip_comments(text: &str) -> String {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim_end()).collect::<Vec<_>>().join("\n")
}

fn sections(text: &str) -> Result<BTreeMap<String, Section>, CliError> {
    let ini = Ini::load_from_str(&strip_comments(text)).map_err(|e| usage(format!("config syntax: {e}")))?;
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    for (name, props) in ini.iter() {
        if name.is_none() && props.is_empty() {
            continue;
        }
        let name = name.unwrap_or("").to_string();
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
            return Err(usage(if name.is_empty() {
                "keys before the first [section] header".to_string()
            } else {
                format!("unknown section [{name}]")
            }));
        };
        let sec = out.entry(name.clone()).or_default();
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                return Err(usage(format!("unknown key '{k}' in [{name}]")));
            }
            if sec.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(usage(format!("duplicate key '{k}' in [{name}]")));
            }
        }
    }
    Ok(out)
}

/// `1/128`, `0.25`, `-3e-2`.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || usage(format!("not a number: '{s}'"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_number).collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    match parse_list(s)?.as_slice() {
        &[a, b] if a < b => Ok((a, b)),
        _ => Err(usage(format!("expected 'lo, hi' with lo < hi, got '{s}'"))),
    }
}

/// Parse a profile descriptor; `base` resolves `file(...)` paths.
pub fn parse_profile(s: &str, base: &Path) -> Result<Profile, CliError> {
    let s = s.trim();
    let (head, args) = match s.find('(') {
        Some(i) if s.ends_with(')') => (s[..i].trim(), Some(&s[i + 1..s.len() - 1])),
        Some(_) => return Err(usage(format!("unbalanced parentheses in profile '{s}'"))),
        None => (s, None),
    };
    if head == "file" {
        let path = args.map(str::trim).filter(|p| !p.is_empty()).ok_or_else(|| usage("file(...) needs a path"))?;
        let path = base.join(path);
        return Ok(Profile::Tabulated(read_profile_csv(&path)?));
    }
    let mut named: BTreeMap<&str, f64> = BTreeMap::new();
    for part in args.unwrap_or("").split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| usage(format!("expected key = value in '{part}'")))?;
        if named.insert(k.trim(), parse_number(v)?).is_some() {
            return Err(usage(format!("parameter '{}' given twice in '{s}'", k.trim())));
        }
    }
    let allowed: &[&str] = match head {
        "zero" => &[],
        "constant" => &["value"],
        "gaussian" | "gaussian-derivative" => &["amplitude", "center", "sigma"],
        "compact-bump" => &["amplitude", "center", "sigma", "lo", "hi"],
        _ => return Err(usage(format!("unknown profile '{head}'"))),
    };
    if let Some(k) = named.keys().find(|k| !allowed.contains(k)) {
        return Err(usage(format!("profile '{head}' has no parameter '{k}'")));
    }
    let get = |k: &str| named.get(k).copied().ok_or_else(|| usage(format!("profile '{head}' needs '{k}'")));
    let center = named.get("center").copied().unwrap_or(0.0);
    let p = match head {
        "zero" => Profile::Zero,
        "constant" => Profile::Constant { value: get("value")? },
        "gaussian" => Profile::Gaussian { amplitude: get("amplitude")?, center, sigma: get("sigma")? },
        "gaussian-derivative" => {
            Profile::GaussianDerivative { amplitude: get("amplitude")?, center, sigma: get("sigma")? }
        }
        _ => Profile::CompactBump {
            amplitude: get("amplitude")?,
            center,
            sigma: get("sigma")?,
            lo: get("lo")?,
            hi: get("hi")?,
        },
    };
    p.validate().map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let secs = sections(text)?;
        let empty = Section::new();
        let sec = |name: &str| secs.get(name).unwrap_or(&empty);
        let num = |name: &str, key: &str, default: Option<f64>| -> Result<f64, CliError> {
            match sec(name).get(key) {
                Some(v) => parse_number(v),
                None => default.ok_or_else(|| usage(format!("missing '{key}' in [{name}]"))),
            }
        };
        let count = |name: &str, key: &str, default: usize| -> Result<usize, CliError> {
            match sec(name).get(key) {
                Some(v) => {
                    v.parse().ok().filter(|&k| k > 0).ok_or_else(|| usage(format!("{key} must be a positive integer")))
                }
                None => Ok(default),
            }
        };

        let data = match (secs.get("graph"), secs.get("geometric")) {
            (Some(_), Some(_)) => return Err(usage("give exactly one of [graph] and [geometric], not both")),
            (None, None) => return Err(usage("missing data block: add a [graph] or [geometric] section")),
            (Some(g), None) => {
                let p = |k: &str| {
                    g.get(k)
                        .ok_or_else(|| usage(format!("missing '{k}' in [graph]")))
                        .and_then(|v| parse_profile(v, base))
                };
                DataSpec::Graph { phi0: p("phi0")?, phi1: p("phi1")? }
            }
            (None, Some(g)) => {
                let p = |k: &str| {
                    g.get(k)
                        .ok_or_else(|| usage(format!("missing '{k}' in [geometric]")))
                        .and_then(|v| parse_profile(v, base))
                };
                DataSpec::Geometric { lambda0: p("lambda0")?, nu0: p("nu0")?, psi0: p("psi0")?, psi1: p("psi1")? }
            }
        };

        let h = num("grid", "h", None)?;
        let scheme = match sec("grid").get("scheme") {
            Some(s) => Scheme::parse(s).map_err(|e| usage(e.to_string()))?,
            None => Scheme::Leapfrog,
        };
        let pipeline = match sec("pipeline").get("name") {
            Some(s) => Pipeline::parse(s).map_err(|e| usage(e.to_string()))?,
            None if data.is_graph() => Pipeline::CrossPipeline,
            None => Pipeline::SchemeAgreement,
        };
        let resolutions = match sec("pipeline").get("resolutions") {
            Some(v) => parse_list(v)?,
            None => vec![h, h / 2.0, h / 4.0],
        };
        let flatness = match (sec("diagnostics").get("flatness_u"), sec("diagnostics").get("flatness_v")) {
            (Some(u), Some(v)) => Some((parse_pair(u)?, parse_pair(v)?)),
            (None, None) => None,
            _ => return Err(usage("flatness_u and flatness_v go together")),
        };
        let epsilon = match sec("diagnostics").get("epsilon") {
            Some(v) => Some(parse_number(v)?)
                .filter(|&e| e > 0.0)
                .map(Some)
                .ok_or_else(|| usage("epsilon must be positive"))?,
            None => None,
        };

        let cfg = Self {
            name: sec("scenario").get("name").cloned().unwrap_or_else(|| "scenario".into()),
            data,
            r_min: num("grid", "r_min", None)?,
            r_max: num("grid", "r_max", None)?,
            h,
            t_final: num("grid", "t_final", None)?,
            cfl: num("grid", "cfl", Some(1.0))?,
            scheme,
            snapshot_every: count("grid", "snapshot_every", 1)?,
            picard_tol: num("grid", "picard_tol", Some(1e-12))?,
            picard_max_iters: count("grid", "picard_max_iters", 50)?,
            pipeline,
            resolutions,
            graph_cfl: num("pipeline", "graph_cfl", Some(0.5))?,
            sample_dt: num("pipeline", "sample_dt", Some(0.25))?,
            epsilon,
            flatness,
            embedding_stride: match sec("output").get("embedding_stride") {
                Some(_) => Some(count("output", "embedding_stride", 1)?),
                None => None,
            },
            order_tolerance: num("tolerances", "order", Some(1.8))?,
            hash: hex_sha256(text.as_bytes()),
        };
        cfg.evolve_config().validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Override the step; the resolution ladder restarts from it.
    pub fn with_resolution(mut self, h: f64) -> Self {
        let n = self.resolutions.len().max(3);
        self.h = h;
        self.resolutions = (0..n).map(|k| h / f64::powi(2.0, k as i32)).collect();
        self
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        let mut c = EvolveConfig::new(self.r_min, self.r_max, self.h, self.t_final)
            .with_scheme(self.scheme)
            .with_cfl(self.cfl)
            .with_snapshot_every(self.snapshot_every);
        c.picard_tol = self.picard_tol;
        c.picard_max_iters = self.picard_max_iters;
        c
    }

    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::new(&self.name, self.data.clone(), self.pipeline, (self.r_min, self.r_max), self.t_final)
            .with_scheme(self.scheme);
        s.cfl = self.cfl;
        s.graph_cfl = self.graph_cfl;
        s.sample_dt = self.sample_dt;
        s
    }
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
