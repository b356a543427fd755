//! Experiment configuration, read from TOML and overridden by flags.
//!
//! ```toml
//! walker = "quantum-2d"
//! coin = "grover"
//! steps = 50
//! seed = 7
//!
//! [disorder]
//! mode = "dynamic"
//! distribution = { poisson = { lambda = 1.0 } }
//!
//! [ensemble]
//! batch_size = 50
//! max_realizations = 2000
//!
//! [fit]
//! t_min = 18
//! t_max = 50
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use qwalk_core::coin::{self, CoinKind, CoinOperator};
use qwalk_core::disorder::DEFAULT_TAIL_BOUND;
use qwalk_core::{DisorderMode, DisorderSpec, Distribution, Protocol, QuantumWalk, Walker};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WalkerKind {
    #[serde(rename = "quantum-1d")]
    Quantum1d,
    #[serde(rename = "quantum-2d")]
    Quantum2d,
    #[serde(rename = "classical-2d")]
    Classical2d,
}

impl WalkerKind {
    pub fn name(self) -> &'static str {
        match self {
            WalkerKind::Quantum1d => "quantum-1d",
            WalkerKind::Quantum2d => "quantum-2d",
            WalkerKind::Classical2d => "classical-2d",
        }
    }

    /// Tag written in the `walker` column of series files.
    pub fn tag(self) -> &'static str {
        match self {
            WalkerKind::Classical2d => "classical",
            _ => "quantum",
        }
    }

    pub fn dim(self) -> usize {
        if self == WalkerKind::Quantum1d { 1 } else { 2 }
    }
}

impl fmt::Display for WalkerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WalkerKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "quantum-1d" => Ok(WalkerKind::Quantum1d),
            "quantum-2d" => Ok(WalkerKind::Quantum2d),
            "classical-2d" | "classical" => Ok(WalkerKind::Classical2d),
            other => Err(CliError::Config(format!("unknown walker `{other}`"))),
        }
    }
}

/// A preset name, or a custom matrix given as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoinSpec {
    Preset(CoinKind),
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderConfig {
    pub mode: DisorderMode,
    pub distribution: Option<Distribution>,
    pub tail_bound: f64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        DisorderConfig { mode: DisorderMode::None, distribution: None, tail_bound: DEFAULT_TAIL_BOUND }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub batch_size: usize,
    pub min_realizations: usize,
    pub max_realizations: usize,
    pub convergence: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        let p = Protocol::default();
        EnsembleConfig {
            batch_size: p.batch_size,
            min_realizations: p.min_realizations,
            max_realizations: p.max_realizations,
            convergence: p.convergence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub t_min: usize,
    pub t_max: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { t_min: 18, t_max: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub walker: WalkerKind,
    pub coin: CoinSpec,
    /// `[re, im]` per coin state; the preset state of `coin` when absent.
    pub initial_coin: Option<Vec<[f64; 2]>>,
    pub steps: usize,
    pub seed: u64,
    /// Snapshot times for `simulate`; the final step when empty.
    pub snapshots: Vec<usize>,
    pub disorder: DisorderConfig,
    pub ensemble: EnsembleConfig,
    pub fit: FitConfig,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            walker: WalkerKind::Quantum2d,
            coin: CoinSpec::Preset(CoinKind::Grover),
            initial_coin: None,
            steps: 50,
            seed: 0,
            snapshots: Vec::new(),
            disorder: DisorderConfig::default(),
            ensemble: EnsembleConfig::default(),
            fit: FitConfig::default(),
            out: PathBuf::from("qwalk-out"),
        }
    }
}

fn complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn coin_operator(&self) -> CliResult<CoinOperator> {
        let op = match &self.coin {
            CoinSpec::Preset(CoinKind::Custom) => return Err(CliError::Config("`custom` coin needs a `matrix`".into())),
            CoinSpec::Preset(kind) => CoinOperator::preset(*kind),
            CoinSpec::Matrix { matrix } => {
                let dim = matrix.len();
                if matrix.iter().any(|row| row.len() != dim) {
                    return Err(CliError::Config("coin matrix must be square".into()));
                }
                CoinOperator::custom(dim, complex(&matrix.concat()))?
            }
        };
        let want = 2 * self.walker.dim();
        if self.walker != WalkerKind::Classical2d && op.dim() != want {
            return Err(CliError::Config(format!("{} walker needs a {want}×{want} coin, got {}×{}", self.walker, op.dim(), op.dim())));
        }
        Ok(op)
    }

    pub fn initial_amplitudes(&self) -> CliResult<Vec<Complex64>> {
        match (&self.initial_coin, &self.coin) {
            (Some(pairs), _) => Ok(complex(pairs)),
            (None, CoinSpec::Preset(kind)) => Ok(coin::initial_coin(*kind)),
            (None, CoinSpec::Matrix { .. }) => Err(CliError::Config("a custom coin needs `initial_coin`".into())),
        }
    }

    pub fn disorder_spec(&self) -> CliResult<Option<DisorderSpec>> {
        match (self.disorder.mode, self.disorder.distribution) {
            (DisorderMode::None, _) => Ok(None),
            (_, None) => Err(CliError::Config("disorder mode set but no distribution given".into())),
            (_, Some(d)) => Ok(Some(DisorderSpec::new(d, self.disorder.tail_bound)?)),
        }
    }

    pub fn quantum_walk(&self) -> CliResult<QuantumWalk> {
        Ok(QuantumWalk {
            dim: self.walker.dim(),
            coin: self.coin_operator()?,
            initial_coin: self.initial_amplitudes()?,
            steps: self.steps,
            mode: self.disorder.mode,
        })
    }

    pub fn walker(&self) -> CliResult<Walker> {
        match self.walker {
            WalkerKind::Classical2d => {
                if self.disorder.mode == DisorderMode::Static {
                    return Err(CliError::Config("the classical walker supports dynamic disorder only".into()));
                }
                Ok(Walker::Classical { steps: self.steps })
            }
            _ => Ok(Walker::Quantum(self.quantum_walk()?)),
        }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            batch_size: self.ensemble.batch_size,
            min_realizations: self.ensemble.min_realizations,
            max_realizations: self.ensemble.max_realizations,
            convergence: self.ensemble.convergence,
            t_min: self.fit.t_min,
            t_max: self.fit.t_max,
            master_seed: self.seed,
        }
    }

    /// Checks that hold for every command.
    pub fn validate(&self) -> CliResult<()> {
        if self.fit.t_min > self.fit.t_max {
            return Err(CliError::Config(format!("t_min {} exceeds t_max {}", self.fit.t_min, self.fit.t_max)));
        }
        if self.walker != WalkerKind::Classical2d {
            self.coin_operator()?;
            self.initial_amplitudes()?;
        }
        self.disorder_spec()?;
        if let Some(&t) = self.snapshots.iter().find(|&&t| t > self.steps) {
            return Err(CliError::Config(format!("snapshot time {t} is beyond {} steps", self.steps)));
        }
        Ok(())
    }
}
