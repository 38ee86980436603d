//! CSV and JSON output.
//!
//! CSV files are comma-separated with a header row; every number is written
//! as `{:.16e}` (17 significant digits), which round-trips an `f64`.
//!
//! Report JSON has the stable keys `title`, `passed`, `metrics`, `checks`
//! (each with `name`, `metric`, `value`, `comparison`, `tolerance`,
//! `passed`), `series` and `provenance`. Maps are key-sorted and
//! non-finite numbers are written as `null`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nullsurf_core::diagnostics::DiagnosticsReport;
use nullsurf_core::fields::{GridSpec1D, SampledFunction1D};
use serde_json::{json, Map, Value};

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streams rows of numbers to a CSV file.
pub struct CsvOut {
    inner: csv::Writer<BufWriter<File>>,
    path: std::path::PathBuf,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        inner.write_record(header).map_err(|e| CliError::csv(path, e))?;
        Ok(Self { inner, path: path.to_path_buf() })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        self.inner.write_record(values.iter().map(|&v| num(v))).map_err(|e| CliError::csv(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Two columns: the grid coordinate and the samples.
pub fn write_sampled(path: &Path, coord: &str, name: &str, f: &SampledFunction1D) -> Result<(), CliError> {
    let mut out = CsvOut::create(path, &[coord, name])?;
    for (x, v) in f.grid().coords().zip(f.values()) {
        out.row(&[x, *v])?;
    }
    out.finish()
}

/// Read an `x,value` CSV on a uniform grid.
pub fn read_profile_csv(path: &Path) -> Result<SampledFunction1D, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::csv(path, e))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        if rec.len() != 2 {
            return Err(bad(format!("row {} has {} columns, expected 2", line + 2, rec.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("row {}: not a number '{s}'", line + 2)));
        xs.push(parse(&rec[0])?);
        vs.push(parse(&rec[1])?);
    }
    if xs.len() < 2 {
        return Err(bad("a tabulated profile needs at least two rows".into()));
    }
    let h = xs[1] - xs[0];
    let grid = GridSpec1D::new(xs[0], h, xs.len()).map_err(|e| bad(e.to_string()))?;
    for (i, &x) in xs.iter().enumerate() {
        if (grid.coord(i) - x).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(bad(format!("x values are not uniformly spaced (row {})", i + 2)));
        }
    }
    SampledFunction1D::new(grid, vs).map_err(|e| bad(e.to_string()))
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn report_json(rep: &DiagnosticsReport) -> Value {
    let metrics: Map<String, Value> = rep.metrics.iter().map(|(k, &v)| (k.clone(), number(v))).collect();
    let series: Map<String, Value> =
        rep.series.iter().map(|(k, v)| (k.clone(), Value::Array(v.iter().map(|&x| number(x)).collect()))).collect();
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "metric": c.metric,
                "value": number(c.value),
                "comparison": c.comparison.symbol(),
                "tolerance": number(c.tolerance),
                "passed": c.passed,
            })
        })
        .collect();
    json!({
        "title": rep.title,
        "passed": rep.passed(),
        "metrics": metrics,
        "checks": checks,
        "series": series,
        "provenance": rep.provenance,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values always serialize");
    text.push('\n');
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn write_report(path: &Path, rep: &DiagnosticsReport) -> Result<(), CliError> {
    write_json(path, &report_json(rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, f64::MAX, 2.0f64.sqrt()] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn non_finite_values_become_null() {
        let mut rep = DiagnosticsReport::new("t");
        rep.metric("bad", f64::INFINITY).metric("good", 1.5);
        let v = report_json(&rep);
        assert_eq!(v["metrics"]["bad"], Value::Null);
        assert_eq!(v["metrics"]["good"], json!(1.5));
        assert_eq!(v["passed"], json!(true));
    }

    #[test]
    fn profile_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let f = SampledFunction1D::from_fn(GridSpec1D::new(-1.0, 0.25, 9).unwrap(), |x| x * x).unwrap();
        write_sampled(&p, "x", "value", &f).unwrap();
        let g = read_profile_csv(&p).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.grid(), f.grid());
    }

    #[test]
    fn ragged_profile_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "x,value\n0,1\n0.5,2\n2,3\n").unwrap();
        assert!(matches!(read_profile_csv(&p), Err(CliError::Usage(_))));
    }
}
