use std::path::Path;

use qwalk_core::classical::{crw_disordered_step, ClassicalDistribution};
use qwalk_core::disorder::JumpField;
use qwalk_core::rng;
use qwalk_core::walk::{evolve, Jumps, Trajectory};
use qwalk_core::{ensemble_average, fit_exponent, DisorderMode, DisorderSpec, Distribution, WalkerState};
use serde::Serialize;

use crate::config::{ExperimentConfig, WalkerKind};
use crate::error::{CliError, CliResult};
use crate::output::{self, Manifest, OutDir, Summary};

fn snapshot_times(config: &ExperimentConfig) -> Vec<usize> {
    if config.snapshots.is_empty() { vec![config.steps] } else { config.snapshots.clone() }
}

fn classical_trajectory(config: &ExperimentConfig, spec: Option<&DisorderSpec>, times: &[usize]) -> Trajectory {
    let mut stream = rng::realization_stream(config.seed, 0);
    let mut p = ClassicalDistribution::point_mass();
    let mut traj = Trajectory::default();
    for t in 0..=config.steps {
        if t > 0 {
            let jump = spec.map_or(1, |s| s.sample_jump(&mut stream));
            p = crw_disordered_step(&p, jump);
        }
        let spread = p.spread();
        traj.sigma.push(spread.sigma);
        traj.norm.push(spread.total);
        if times.contains(&t) {
            traj.snapshots.push(p.to_position_distribution());
        }
    }
    traj
}

/// One trajectory (realization 0 of the master seed) with position snapshots.
pub fn simulate(config: &ExperimentConfig) -> CliResult<()> {
    config.validate()?;
    let spec = config.disorder_spec()?;
    let times = snapshot_times(config);
    let traj = if config.walker == WalkerKind::Classical2d {
        if config.disorder.mode == DisorderMode::Static {
            return Err(CliError::Config("the classical walker supports dynamic disorder only".into()));
        }
        classical_trajectory(config, spec.as_ref(), &times)
    } else {
        let walk = config.quantum_walk()?;
        let mut state = WalkerState::new(walk.dim, &walk.initial_coin)?;
        match (config.disorder.mode, spec.as_ref()) {
            (DisorderMode::Dynamic, Some(spec)) => {
                let seq = spec.sample_sequence_with(config.steps, &mut rng::realization_stream(config.seed, 0));
                evolve(&mut state, &walk.coin, Jumps::Dynamic(&seq), config.steps, &times)?
            }
            (DisorderMode::Static, Some(spec)) => {
                let mut field = JumpField::for_realization(spec, walk.dim, 0, config.seed, 0);
                evolve(&mut state, &walk.coin, Jumps::Static(&mut field), config.steps, &times)?
            }
            _ => evolve(&mut state, &walk.coin, Jumps::Clean, config.steps, &times)?,
        }
    };
    if let Some(t) = traj.norm.iter().position(|n| !n.is_finite()) {
        return Err(CliError::Numerical(format!("norm became {} at t = {t}", traj.norm[t])));
    }

    let mut out = OutDir::create(&config.out)?;
    for snap in &traj.snapshots {
        out.write(&format!("snapshot_t{}.csv", snap.t()), &output::snapshot_csv(snap))?;
    }
    out.write("sigma.csv", &output::trajectory_csv(&traj.sigma, &traj.norm))?;
    let mut manifest = Manifest::new("simulate", config);
    manifest.realization_seeds = vec![0];
    manifest.finish(&mut out)
}

fn write_series(command: &'static str, config: &ExperimentConfig, sigma: &[f64], result: Option<&qwalk_core::EnsembleResult>) -> CliResult<Summary> {
    let (realizations, fit, converged) = match result {
        Some(r) => (r.realizations, r.fit, r.converged),
        None => {
            let series: Vec<(f64, f64)> = sigma.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect();
            (1, fit_exponent(&series, config.fit.t_min as f64, config.fit.t_max as f64)?, true)
        }
    };
    let summary = Summary::new(&fit, Some(realizations), Some(converged));
    let mut out = OutDir::create(&config.out)?;
    out.write("series.csv", &output::series_csv(sigma, realizations, config.walker.tag()))?;
    out.write("summary.json", &output::to_json(&summary))?;
    let mut manifest = Manifest::new(command, config);
    manifest.fit = Some(fit);
    manifest.converged = Some(converged);
    if let Some(r) = result {
        manifest.realization_seeds = r.realization_seeds.clone();
        manifest.history = r.history.clone();
    } else {
        manifest.realization_seeds = vec![0];
    }
    manifest.finish(&mut out)?;
    Ok(summary)
}

fn check_steps(config: &ExperimentConfig) -> CliResult<()> {
    if config.steps < config.fit.t_max {
        return Err(CliError::Config(format!("{} steps do not reach t_max = {}", config.steps, config.fit.t_max)));
    }
    Ok(())
}

/// Disorder-averaged ⟨σ(t)⟩ under the batch convergence protocol.
pub fn ensemble(config: &ExperimentConfig) -> CliResult<Summary> {
    config.validate()?;
    check_steps(config)?;
    let spec = config.disorder_spec()?;
    if spec.is_none() {
        return Err(CliError::Config("ensemble needs dynamic or static disorder (--disorder KIND:PARAMS)".into()));
    }
    let result = ensemble_average(&config.walker()?, spec.as_ref(), &config.protocol())?;
    if !result.converged {
        eprintln!(
            "warning: alpha did not settle to two significant figures within {} realizations",
            result.realizations
        );
    }
    write_series("ensemble", config, &result.sigma_mean, Some(&result))
}

/// Classical baseline: the exact clean map, or an ensemble under dynamic disorder.
pub fn classical(config: &ExperimentConfig) -> CliResult<Summary> {
    let config = ExperimentConfig { walker: WalkerKind::Classical2d, ..config.clone() };
    config.validate()?;
    check_steps(&config)?;
    match config.disorder_spec()? {
        None => {
            let traj = classical_trajectory(&config, None, &[]);
            write_series("classical", &config, &traj.sigma, None)
        }
        Some(spec) => {
            let result = ensemble_average(&config.walker()?, Some(&spec), &config.protocol())?;
            if !result.converged {
                eprintln!("warning: alpha did not settle within {} realizations", result.realizations);
            }
            write_series("classical", &config, &result.sigma_mean, Some(&result))
        }
    }
}

/// Fits a series file with `t` and `sigma_mean` (or `sigma`) columns.
pub fn fit(series: &Path, t_min: usize, t_max: usize, out: Option<&Path>) -> CliResult<Summary> {
    let mut reader = csv::Reader::from_path(series).map_err(|e| csv_error(series, e))?;
    let headers = reader.headers().map_err(|e| csv_error(series, e))?.clone();
    let column = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim()));
    let t_col = column(&["t"]).ok_or_else(|| CliError::Config(format!("{}: no `t` column", series.display())))?;
    let s_col = column(&["sigma_mean", "sigma"]).ok_or_else(|| CliError::Config(format!("{}: no `sigma_mean` column", series.display())))?;
    let n_col = column(&["n_realizations"]);

    let mut points = Vec::new();
    let mut n_final = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(series, e))?;
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let parse = |i: usize| -> CliResult<f64> {
            field(i).parse().map_err(|_| CliError::Config(format!("{}: row {}: `{}` is not a number", series.display(), line + 2, field(i))))
        };
        let t = parse(t_col)?;
        if (t_min as f64..=t_max as f64).contains(&t) && field(s_col).is_empty() {
            return Err(CliError::Numerical(format!("missing sigma at t = {t}")));
        }
        let sigma = if field(s_col).is_empty() { f64::NAN } else { parse(s_col)? };
        if let Some(c) = n_col {
            n_final = field(c).parse().ok();
        }
        points.push((t, sigma));
    }
    let fit = fit_exponent(&points, t_min as f64, t_max as f64)?;
    let summary = Summary::new(&fit, n_final, None);
    let json = output::to_json(&summary);
    match out {
        Some(path) => std::fs::write(path, &json).map_err(|e| CliError::io(path, e))?,
        None => print!("{json}"),
    }
    Ok(summary)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub spec: String,
    pub tail_bound: f64,
    pub truncation_radius: u32,
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
}

/// pmf table up to the truncation radius plus exact moments.
pub fn distribution(dist: Distribution, tail_bound: f64, out: &Path) -> CliResult<DistributionReport> {
    let spec = DisorderSpec::new(dist, tail_bound)?;
    let radius = spec.truncation_radius();
    let rows: Vec<(u64, f64, f64)> = (0..=radius as u64).map(|k| (k, spec.pmf(k), spec.truncated_pmf(k))).collect();
    let m = spec.exact_moments();
    let report = DistributionReport {
        spec: dist.to_string(),
        tail_bound,
        truncation_radius: radius,
        mean: m.mean,
        variance: m.variance,
        fano: m.fano,
    };
    let mut dir = OutDir::create(out)?;
    dir.write("pmf.csv", &output::pmf_csv(&rows))?;
    dir.write("moments.json", &output::to_json(&report))?;
    Ok(report)
}
