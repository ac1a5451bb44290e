//! Report records and their bit-stable serialization.
//!
//! JSON objects are written with sorted keys and every floating-point number
//! as `{:.12e}`; integers stay integers. Non-finite summary values are the
//! strings `"inf"`, `"-inf"` and `"nan"`. Files are written to a temporary
//! sibling and renamed into place.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use lfot::entropy::Regime;
use lfot::montecarlo::Verdict;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Experiment;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Structured reason attached to reports of checks that raised an error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReason {
    pub kind: String,
    pub message: String,
}

impl From<&lfot::Error> for ErrorReason {
    fn from(e: &lfot::Error) -> Self {
        ErrorReason {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Result of one check. `slack >= -3·stderr` (plus rounding floor) is the
/// pass condition of every Monte Carlo check; deterministic checks report
/// `tolerance - error` with zero `stderr`.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: f64,
    pub stderr: f64,
    pub samples: usize,
    pub regime: Option<Regime>,
    pub details: Value,
    pub error: Option<ErrorReason>,
}

impl Outcome {
    /// Deterministic check: passes when every `(error, tolerance)` pair has
    /// `error <= tolerance`; `slack` is the smallest `tolerance - error`.
    pub fn tolerance(checks: &[(f64, f64)], samples: usize, details: Value) -> Self {
        let slack = checks
            .iter()
            .map(|(e, tol)| tol - e)
            .fold(f64::INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.min(b) });
        let verdict = if slack.is_nan() {
            Verdict::Inconclusive
        } else if slack >= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Outcome {
            verdict,
            lhs: None,
            rhs: None,
            slack,
            stderr: 0.0,
            samples,
            regime: None,
            details,
            error: None,
        }
    }

    /// Check aborted by a numerical or domain error.
    pub fn from_error(e: &lfot::Error) -> Self {
        Outcome {
            verdict: Verdict::Inconclusive,
            lhs: None,
            rhs: None,
            slack: f64::NAN,
            stderr: f64::NAN,
            samples: 0,
            regime: None,
            details: Value::Null,
            error: Some(e.into()),
        }
    }
}

pub fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 2,
    }
}

/// JSON value of a float that keeps non-finite values readable.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn real_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn write_canonical(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&fmt_real(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_canonical(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_canonical(&map[*key], indent + 1, out);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Sorted-key, fixed-precision JSON text of `v`.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, 0, &mut out);
    out.push('\n');
    out
}

/// Full JSON report of an experiment.
pub fn report_value(exp: &Experiment, o: &Outcome) -> Value {
    let c = &exp.config;
    let mut echo = c.clone();
    echo.out = None;
    json!({
        "check": c.check.name(),
        "config": to_value(&echo),
        "config_hash": c.hash(),
        "error": o.error.as_ref().map_or(Value::Null, to_value),
        "lhs": real_opt(o.lhs),
        "model": to_value(&c.model),
        "params": c.params.as_ref().map_or(Value::Null, to_value),
        "regime": o.regime.as_ref().map_or(Value::Null, to_value),
        "result": o.details.clone(),
        "rhs": real_opt(o.rhs),
        "samples": o.samples,
        "seed": c.seed,
        "slack": real(o.slack),
        "stderr": real(o.stderr),
        "verdict": verdict_word(o.verdict),
        "version": VERSION,
    })
}

pub const CSV_HEADER: &str =
    "check,model,dim,regime,K,N,q,t,lhs,rhs,slack,stderr,samples,seed,verdict,config_hash";

/// Summary row matching [`CSV_HEADER`].
pub fn csv_row(exp: &Experiment, o: &Outcome) -> String {
    let c = &exp.config;
    let opt = |x: Option<f64>| x.map_or(String::new(), fmt_real);
    let p = c.params.as_ref();
    let regime = o
        .regime
        .as_ref()
        .and_then(|r| to_value(r).as_str().map(str::to_string))
        .unwrap_or_default();
    [
        c.check.name().to_string(),
        c.model.name.to_string(),
        c.model.dim.to_string(),
        regime,
        opt(p.map(|p| p.k)),
        opt(p.map(|p| p.n)),
        opt(p.map(|p| p.q).or(c.q)),
        opt(p.map(|p| p.t)),
        opt(o.lhs),
        opt(o.rhs),
        fmt_real(o.slack),
        fmt_real(o.stderr),
        o.samples.to_string(),
        c.seed.to_string(),
        verdict_word(o.verdict).to_string(),
        c.hash(),
    ]
    .join(",")
}

/// One-line verdict for the terminal.
pub fn verdict_line(exp: &Experiment, o: &Outcome) -> String {
    let mut line = format!(
        "{} {} {} slack={:.6e} stderr={:.6e}",
        verdict_word(o.verdict),
        exp.config.check.name(),
        exp.config.model.name,
        o.slack,
        o.stderr
    );
    if let Some(e) = &o.error {
        write!(line, " error={}: {}", e.kind, e.message).unwrap();
    }
    line
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = with_suffix(path, &format!(".tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// Writes `<prefix>.json` and appends the summary row to `<prefix>.csv`,
/// starting a new file when the existing header differs.
pub fn emit_report(prefix: &Path, exp: &Experiment, o: &Outcome) -> io::Result<(PathBuf, PathBuf)> {
    let json_path = with_suffix(prefix, ".json");
    let csv_path = with_suffix(prefix, ".csv");
    atomic_write(&json_path, canonical_json(&report_value(exp, o)).as_bytes())?;
    let mut csv = match fs::read_to_string(&csv_path) {
        Ok(old) if old.lines().next() == Some(CSV_HEADER) => old,
        Ok(_) => format!("{CSV_HEADER}\n"),
        Err(e) if e.kind() == io::ErrorKind::NotFound => format!("{CSV_HEADER}\n"),
        Err(e) => return Err(e),
    };
    if !csv.ends_with('\n') {
        csv.push('\n');
    }
    csv.push_str(&csv_row(exp, o));
    csv.push('\n');
    atomic_write(&csv_path, csv.as_bytes())?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys_and_fixes_floats() {
        let v = json!({"b": 1.5, "a": [1, -2, 0.1], "c": {"z": null, "y": "s"}});
        let text = canonical_json(&v);
        let expected = "{\n  \"a\": [\n    1,\n    -2,\n    1.000000000000e-1\n  ],\n  \"b\": 1.500000000000e0,\n  \"c\": {\n    \"y\": \"s\",\n    \"z\": null\n  }\n}\n";
        assert_eq!(text, expected);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"], json!(1.5));
    }

    #[test]
    fn non_finite_summaries_are_strings() {
        assert_eq!(real(f64::INFINITY), json!("inf"));
        assert_eq!(real(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(real(f64::NAN), json!("nan"));
        assert_eq!(fmt_real(-0.25), "-2.500000000000e-1");
    }

    #[test]
    fn tolerance_outcomes() {
        let o = Outcome::tolerance(&[(1e-12, 1e-10), (0.5, 1.0)], 3, Value::Null);
        assert_eq!(o.verdict, Verdict::Pass);
        assert!((o.slack - (1e-10 - 1e-12)).abs() < 1e-24);
        let o = Outcome::tolerance(&[(2.0, 1.0)], 3, Value::Null);
        assert_eq!(o.verdict, Verdict::Fail);
        let o = Outcome::tolerance(&[(f64::NAN, 1.0)], 3, Value::Null);
        assert_eq!(o.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/r.json");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
