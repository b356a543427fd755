//! wasm-bindgen entry points for the demo page in `www/`.
//!
//! Everything runs on the calling thread; realizations are evaluated one
//! after another.

use qwalk_core::coin::CoinKind;
use qwalk_core::disorder::JumpField;
use qwalk_core::stats::mean_series;
use qwalk_core::walk::{evolve, Jumps};
use qwalk_core::{fit_exponent, rng, DisorderMode, DisorderSpec, Distribution, QuantumWalk, WalkerState};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// An empty string means a clean walk.
fn parse_disorder(disorder: &str, is_static: bool) -> Result<(DisorderMode, Option<DisorderSpec>), JsError> {
    let disorder = disorder.trim();
    if disorder.is_empty() {
        return Ok((DisorderMode::None, None));
    }
    let dist: Distribution = disorder.parse().map_err(err)?;
    let spec = DisorderSpec::with_default_tail(dist).map_err(err)?;
    let mode = if is_static { DisorderMode::Static } else { DisorderMode::Dynamic };
    Ok((mode, Some(spec)))
}

fn walk(coin: &str, steps: usize, mode: DisorderMode) -> Result<QuantumWalk, JsError> {
    let kind: CoinKind = coin.parse().map_err(err)?;
    if kind == CoinKind::Custom {
        return Err(JsError::new("the demo supports preset coins only"));
    }
    Ok(QuantumWalk::preset(kind, steps, mode))
}

/// Position probabilities after `steps` steps of one realization.
#[wasm_bindgen]
pub struct Snapshot {
    dim: usize,
    radius: usize,
    probs: Vec<f64>,
    sigma: Vec<f64>,
    norm: Vec<f64>,
}

#[wasm_bindgen]
impl Snapshot {
    #[wasm_bindgen(getter)]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sites run over `[-radius, radius]` on each axis.
    #[wasm_bindgen(getter)]
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Row-major, `y` outer; a single row in 1D.
    pub fn probs(&self) -> Vec<f64> {
        self.probs.clone()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.sigma.clone()
    }

    /// Squared norm before renormalization, per step.
    pub fn norm(&self) -> Vec<f64> {
        self.norm.clone()
    }
}

#[wasm_bindgen]
pub fn simulate(coin: &str, steps: usize, disorder: &str, is_static: bool, seed: u32) -> Result<Snapshot, JsError> {
    let (mode, spec) = parse_disorder(disorder, is_static)?;
    let walk = walk(coin, steps, mode)?;
    let mut state = WalkerState::new(walk.dim, &walk.initial_coin).map_err(err)?;
    let seed = u64::from(seed);
    let traj = match (mode, spec.as_ref()) {
        (DisorderMode::Dynamic, Some(spec)) => {
            let seq = spec.sample_sequence_with(steps, &mut rng::realization_stream(seed, 0));
            evolve(&mut state, &walk.coin, Jumps::Dynamic(&seq), steps, &[steps])
        }
        (DisorderMode::Static, Some(spec)) => {
            let mut field = JumpField::for_realization(spec, walk.dim, 0, seed, 0);
            evolve(&mut state, &walk.coin, Jumps::Static(&mut field), steps, &[steps])
        }
        _ => evolve(&mut state, &walk.coin, Jumps::Clean, steps, &[steps]),
    }
    .map_err(err)?;
    let snap = traj.snapshots.last().ok_or_else(|| JsError::new("no snapshot recorded"))?;
    Ok(Snapshot {
        dim: snap.dim(),
        radius: snap.radius(),
        probs: snap.probs().to_vec(),
        sigma: traj.sigma,
        norm: traj.norm,
    })
}

/// Disorder-averaged ⟨σ(t)⟩ over a fixed number of realizations and its
/// power-law fit.
#[wasm_bindgen]
pub struct SpreadFit {
    sigma_mean: Vec<f64>,
    pub alpha: f64,
    pub ci95: f64,
    pub lsq_error: f64,
    pub realizations: usize,
}

#[wasm_bindgen]
impl SpreadFit {
    pub fn sigma_mean(&self) -> Vec<f64> {
        self.sigma_mean.clone()
    }
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spread(
    coin: &str,
    steps: usize,
    disorder: &str,
    is_static: bool,
    seed: u32,
    realizations: usize,
    t_min: usize,
    t_max: usize,
) -> Result<SpreadFit, JsError> {
    let (mode, spec) = parse_disorder(disorder, is_static)?;
    let walk = walk(coin, steps, mode)?;
    let n = if spec.is_some() { realizations.max(1) } else { 1 };
    let runs = (0..n as u64)
        .map(|i| walk.sigma_series(spec.as_ref(), u64::from(seed), i))
        .collect::<qwalk_core::Result<Vec<_>>>()
        .map_err(err)?;
    let sigma_mean = mean_series(&runs);
    let series: Vec<(f64, f64)> = sigma_mean.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect();
    let fit = fit_exponent(&series, t_min as f64, t_max as f64).map_err(err)?;
    Ok(SpreadFit { sigma_mean, alpha: fit.alpha, ci95: fit.ci95, lsq_error: fit.lsq_error, realizations: n })
}

/// `pmf(k)` for `k = 0..=R`, where `R` is the truncation radius used when
/// sampling jumps.
#[wasm_bindgen]
pub fn pmf_table(distribution: &str) -> Result<Vec<f64>, JsError> {
    let dist: Distribution = distribution.trim().parse().map_err(err)?;
    let spec = DisorderSpec::with_default_tail(dist).map_err(err)?;
    Ok((0..=u64::from(spec.truncation_radius())).map(|k| spec.pmf(k)).collect())
}

/// Mean, variance and Fano factor of the untruncated distribution.
#[wasm_bindgen]
pub fn moments(distribution: &str) -> Result<Vec<f64>, JsError> {
    let dist: Distribution = distribution.trim().parse().map_err(err)?;
    let m = dist.validate().map(|()| dist.exact_moments()).map_err(err)?;
    Ok(vec![m.mean, m.variance, m.fano])
}
