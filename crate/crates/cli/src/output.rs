//! File writers. Every float is written with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qwalk_core::ensemble::ConvergencePoint;
use qwalk_core::{PositionDistribution, ScalingFit};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON formatter that writes floats as `{:.16e}`.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Collects output files and writes them into one directory.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

/// `x, y, p` over every site of the snapshot's region.
pub fn snapshot_csv(p: &PositionDistribution) -> String {
    csv_text(&["x", "y", "p"], p.iter().map(|(x, y, prob)| vec![x.to_string(), y.to_string(), num(prob)]))
}

pub fn trajectory_csv(sigma: &[f64], norm: &[f64]) -> String {
    csv_text(&["t", "sigma", "norm"], sigma.iter().zip(norm).enumerate().map(|(t, (s, n))| vec![t.to_string(), num(*s), num(*n)]))
}

pub fn series_csv(sigma_mean: &[f64], realizations: usize, walker: &str) -> String {
    csv_text(
        &["t", "sigma_mean", "n_realizations", "walker"],
        sigma_mean.iter().enumerate().map(|(t, s)| vec![t.to_string(), num(*s), realizations.to_string(), walker.to_string()]),
    )
}

pub fn pmf_csv(rows: &[(u64, f64, f64)]) -> String {
    csv_text(&["k", "pmf", "truncated_pmf"], rows.iter().map(|&(k, p, q)| vec![k.to_string(), num(p), num(q)]))
}

/// Fit summary schema shared by `ensemble`, `classical` and `fit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub alpha: f64,
    pub ci95: f64,
    pub lsq_error: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Realizations behind the series; null when the input did not say.
    pub n_final: Option<usize>,
    /// Null when the series was not produced by the convergence protocol.
    pub converged: Option<bool>,
}

impl Summary {
    pub fn new(fit: &ScalingFit, n_final: Option<usize>, converged: Option<bool>) -> Self {
        Summary { alpha: fit.alpha, ci95: fit.ci95, lsq_error: fit.lsq_error, t_min: fit.t_min, t_max: fit.t_max, n_final, converged }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the effective config in canonical TOML form.
    pub config_hash: String,
    /// Unix seconds; `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
    pub master_seed: u64,
    pub realization_seeds: Vec<u64>,
    pub history: Vec<ConvergencePoint>,
    pub fit: Option<ScalingFit>,
    pub converged: Option<bool>,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let digest = Sha256::digest(config.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

impl Manifest {
    pub fn new(command: &'static str, config: &ExperimentConfig) -> Self {
        Manifest {
            tool: "qwalk",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: config_hash(config),
            timestamp: timestamp(),
            master_seed: config.seed,
            realization_seeds: Vec::new(),
            history: Vec::new(),
            fit: None,
            converged: None,
            files: Vec::new(),
            config: config.clone(),
        }
    }

    /// Records the files written so far, then writes `manifest.json` and the
    /// effective `config.toml` next to them.
    pub fn finish(mut self, out: &mut OutDir) -> CliResult<()> {
        self.files = out.written().iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
        self.files.push("config.toml".into());
        out.write("config.toml", &self.config.to_toml())?;
        out.write("manifest.json", &to_json(&self))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-2.5e-300), "-2.5000000000000000e-300");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_floats_use_the_same_format() {
        let json = to_json(&serde_json::json!({"a": 0.5, "b": [1.0, 3], "c": null}));
        assert_eq!(json, "{\"a\":5.0000000000000000e-1,\"b\":[1.0000000000000000e0,3],\"c\":null}\n");
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_has_header() {
        let text = series_csv(&[0.0, 1.5], 3, "quantum");
        assert_eq!(text, "t,sigma_mean,n_realizations,walker\n0,0.0000000000000000e0,3,quantum\n1,1.5000000000000000e0,3,quantum\n");
    }
}
