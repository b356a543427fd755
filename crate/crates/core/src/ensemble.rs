//! Disorder-averaged spreading and the batch convergence protocol.
//!
//! Realizations are grown in batches. After each batch ⟨σ(t)⟩ over all
//! realizations so far is refitted; the run stops once two consecutive fits
//! agree to two significant figures (or at the realization cap).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical;
use crate::coin::{self, CoinKind, CoinOperator};
use crate::disorder::{DisorderSpec, JumpField};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{fit_exponent, mean_series, round_sig, ScalingFit};
use crate::walk::{evolve, Jumps, WalkerState};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderMode {
    None,
    /// One jump per time step, shared by every site and direction.
    Dynamic,
    /// One jump per vertex, fixed for the whole evolution.
    Static,
}

/// A quantum walk to be run once per realization.
#[derive(Debug, Clone)]
pub struct QuantumWalk {
    pub dim: usize,
    pub coin: CoinOperator,
    pub initial_coin: Vec<Complex64>,
    pub steps: usize,
    pub mode: DisorderMode,
}

impl QuantumWalk {
    /// Preset coin with its preset initial state; `Hadamard2` runs on a line.
    pub fn preset(kind: CoinKind, steps: usize, mode: DisorderMode) -> Self {
        QuantumWalk {
            dim: if kind == CoinKind::Hadamard2 { 1 } else { 2 },
            coin: CoinOperator::preset(kind),
            initial_coin: coin::initial_coin(kind),
            steps,
            mode,
        }
    }

    /// σ(t), `t = 0..=steps`, for realization `index` of the ensemble keyed
    /// by `master`.
    pub fn sigma_series(&self, spec: Option<&DisorderSpec>, master: u64, index: u64) -> Result<Vec<f64>> {
        let mut state = WalkerState::new(self.dim, &self.initial_coin)?;
        let traj = match (self.mode, spec) {
            (DisorderMode::None, _) => evolve(&mut state, &self.coin, Jumps::Clean, self.steps, &[])?,
            (DisorderMode::Dynamic, Some(spec)) => {
                let mut stream = rng::realization_stream(master, index);
                let mut seq = spec.sample_sequence_with(self.steps, &mut stream);
                seq.seed = index;
                evolve(&mut state, &self.coin, Jumps::Dynamic(&seq), self.steps, &[])?
            }
            (DisorderMode::Static, Some(spec)) => {
                let mut field = JumpField::for_realization(spec, self.dim, 0, master, index);
                evolve(&mut state, &self.coin, Jumps::Static(&mut field), self.steps, &[])?
            }
            (_, None) => return Err(Error::Config("disordered walk needs a distribution".into())),
        };
        Ok(traj.sigma)
    }
}

/// Which walker an ensemble runs.
#[derive(Debug, Clone)]
pub enum Walker {
    Quantum(QuantumWalk),
    /// Dynamic jump disorder when a spec is given, else the clean walk.
    Classical { steps: usize },
}

impl Walker {
    pub fn steps(&self) -> usize {
        match self {
            Walker::Quantum(q) => q.steps,
            Walker::Classical { steps } => *steps,
        }
    }

    pub fn sigma_series(&self, spec: Option<&DisorderSpec>, master: u64, index: u64) -> Result<Vec<f64>> {
        match self {
            Walker::Quantum(q) => q.sigma_series(spec, master, index),
            Walker::Classical { steps } => classical::classical_sigma_series(spec, *steps, master, index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub batch_size: usize,
    /// No convergence check is honoured below this many realizations.
    pub min_realizations: usize,
    pub max_realizations: usize,
    /// When false, exactly `max_realizations` are run.
    pub convergence: bool,
    pub t_min: usize,
    pub t_max: usize,
    pub master_seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            batch_size: 50,
            min_realizations: 0,
            max_realizations: 2000,
            convergence: true,
            t_min: 18,
            t_max: 50,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub realizations: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// ⟨σ(t)⟩ for `t = 0..=steps`.
    pub sigma_mean: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    /// Stream index of every realization, in merge order.
    pub realization_seeds: Vec<u64>,
    pub history: Vec<ConvergencePoint>,
    pub fit: ScalingFit,
    pub converged: bool,
}

impl EnsembleResult {
    /// `(t, ⟨σ(t)⟩)` pairs.
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.sigma_mean.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect()
    }
}

fn agrees(a: f64, b: f64) -> bool {
    round_sig(a, 2) == round_sig(b, 2)
}

/// Runs the batch protocol over realizations produced by `realize(index)`.
/// Batches run in parallel on the current rayon pool; results are merged by
/// realization index so the outcome is schedule-independent.
pub fn ensemble_with<F>(protocol: &Protocol, realize: F) -> Result<EnsembleResult>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    if protocol.batch_size == 0 || protocol.max_realizations == 0 {
        return Err(Error::Config("batch size and realization cap must be positive".into()));
    }
    if protocol.t_min > protocol.t_max {
        return Err(Error::Config(format!("t_min {} exceeds t_max {}", protocol.t_min, protocol.t_max)));
    }
    let mut runs: Vec<Vec<f64>> = Vec::new();
    let mut history: Vec<ConvergencePoint> = Vec::new();
    let mut converged = false;
    let (t_min, t_max) = (protocol.t_min as f64, protocol.t_max as f64);

    while runs.len() < protocol.max_realizations {
        let start = runs.len() as u64;
        let end = (runs.len() + protocol.batch_size).min(protocol.max_realizations) as u64;
        let batch: Vec<Vec<f64>> = (start..end).into_par_iter().map(&realize).collect::<Result<_>>()?;
        runs.extend(batch);

        let series = indexed(&mean_series(&runs));
        let fit = fit_exponent(&series, t_min, t_max)?;
        history.push(ConvergencePoint { realizations: runs.len(), alpha: fit.alpha });
        converged = history.len() >= 2 && agrees(history[history.len() - 2].alpha, fit.alpha);
        if protocol.convergence && converged && runs.len() >= protocol.min_realizations {
            break;
        }
    }

    let sigma_mean = mean_series(&runs);
    let fit = fit_exponent(&indexed(&sigma_mean), t_min, t_max)?;
    Ok(EnsembleResult {
        sigma_mean,
        realizations: runs.len(),
        master_seed: protocol.master_seed,
        realization_seeds: (0..runs.len() as u64).collect(),
        history,
        fit,
        converged,
    })
}

fn indexed(values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().enumerate().map(|(t, &s)| (t as f64, s)).collect()
}

/// Disorder-averaged ⟨σ(t)⟩ and its fitted exponent.
pub fn ensemble_average(walker: &Walker, spec: Option<&DisorderSpec>, protocol: &Protocol) -> Result<EnsembleResult> {
    if walker.steps() < protocol.t_max {
        return Err(Error::Config(format!("{} steps do not reach t_max = {}", walker.steps(), protocol.t_max)));
    }
    let master = protocol.master_seed;
    ensemble_with(protocol, |index| walker.sigma_series(spec, master, index))
}
