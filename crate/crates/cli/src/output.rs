//! Number formatting, CSV assembly and artifact writing.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// `x` with 12 significant digits: fixed notation for exponents in [−5, 12),
/// scientific otherwise, trailing zeros dropped.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let digits = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.digits$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// `x` rounded to 12 significant digits, for JSON output.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(fmt12(x));
    }
    json!(fmt12(x).parse::<f64>().expect("fmt12 output parses"))
}

/// A CSV table with a JSON comment line.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, header: &Value) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# {}", serde_json::to_string(header)?)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        drop(w);
        Ok(buf)
    }
}

/// What a command produces.
pub enum Body {
    Csv(Table),
    Json(Value),
}

pub struct Artifact {
    pub body: Body,
    /// Counts, tail bounds and other run facts for the sidecar.
    pub facts: Value,
}

/// The header carried by every CSV: deterministic fields only.
pub fn header(cfg: &RunConfig) -> Result<Value> {
    Ok(json!({
        "tool": "hypangle",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(cfg)?,
    }))
}

pub fn render(cfg: &RunConfig, art: &Artifact) -> Result<Vec<u8>> {
    match &art.body {
        Body::Csv(t) => t.render(&header(cfg)?),
        Body::Json(v) => {
            let mut s = serde_json::to_vec_pretty(v)?;
            s.push(b'\n');
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    threads: Option<usize>,
    effective_threads: usize,
    out: Option<&'a Path>,
    wall_time_s: f64,
    facts: &'a Value,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the artifact to `cfg.out` (plus sidecar) or to stdout.
pub fn emit(cfg: &RunConfig, art: &Artifact, wall_time_s: f64, effective_threads: usize) -> Result<()> {
    let bytes = render(cfg, art)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            let meta = Sidecar {
                tool: "hypangle",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                threads: cfg.threads,
                effective_threads,
                out: Some(path),
                wall_time_s,
                facts: &art.facts,
            };
            let side = sidecar_path(path);
            let mut text = serde_json::to_vec_pretty(&meta)?;
            text.push(b'\n');
            std::fs::write(&side, text).with_context(|| format!("writing {}", side.display()))?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes).context("writing stdout")?;
            out.flush().context("writing stdout")?;
        }
    }
    Ok(())
}
