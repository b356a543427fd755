//! Coin operators and the preset initial coin states.
//!
//! Basis convention for the 2D walk: `|0⟩ → +x`, `|1⟩ → −x`, `|2⟩ → +y`,
//! `|3⟩ → −y`. In 1D, `|0⟩ → +x` and `|1⟩ → −x`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum tolerated entry of `C·C† − I`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Tolerance on the squared norm of an initial coin vector.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinKind {
    /// 4×4 Grover diffusion, entries `½ − δ_ij`.
    Grover,
    /// 4×4 discrete Fourier transform, entries `½·i^(jk)`.
    Fourier,
    /// `H₂ ⊗ H₂`.
    Hadamard,
    /// Single-qubit Hadamard for the walk on a line.
    Hadamard2,
    Custom,
}

impl CoinKind {
    pub fn name(self) -> &'static str {
        match self {
            CoinKind::Grover => "grover",
            CoinKind::Fourier => "fourier",
            CoinKind::Hadamard => "hadamard",
            CoinKind::Hadamard2 => "hadamard2",
            CoinKind::Custom => "custom",
        }
    }
}

impl fmt::Display for CoinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grover" | "g" => Ok(CoinKind::Grover),
            "fourier" | "f" => Ok(CoinKind::Fourier),
            "hadamard" | "h" => Ok(CoinKind::Hadamard),
            "hadamard2" | "h2" => Ok(CoinKind::Hadamard2),
            other => Err(Error::Config(format!("unknown coin `{other}`"))),
        }
    }
}

/// A unitary acting on the coin space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinOperator {
    dim: usize,
    entries: Vec<Complex64>,
    kind: CoinKind,
}

impl CoinOperator {
    /// Builds one of the named presets.
    ///
    /// # Panics
    /// Panics for [`CoinKind::Custom`], which has no fixed matrix; use
    /// [`CoinOperator::custom`] instead.
    pub fn preset(kind: CoinKind) -> Self {
        let half = 0.5;
        let entries = match kind {
            CoinKind::Grover => (0..16)
                .map(|n| {
                    let (i, j) = (n / 4, n % 4);
                    Complex64::new(if i == j { half - 1.0 } else { half }, 0.0)
                })
                .collect(),
            CoinKind::Fourier => (0..16)
                .map(|n| {
                    let (j, k) = (n / 4, n % 4);
                    Complex64::i().powu(((j * k) % 4) as u32) * half
                })
                .collect(),
            CoinKind::Hadamard => (0..16u32)
                .map(|n| {
                    let (j, k) = (n / 4, n % 4);
                    let sign = if (j & k).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign * half, 0.0)
                })
                .collect(),
            CoinKind::Hadamard2 => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [h, h, h, -h].iter().map(|&v| Complex64::new(v, 0.0)).collect()
            }
            CoinKind::Custom => panic!("custom coins are built with CoinOperator::custom"),
        };
        let dim = if kind == CoinKind::Hadamard2 { 2 } else { 4 };
        CoinOperator { dim, entries, kind }
    }

    /// Wraps a caller-supplied row-major matrix after checking unitarity.
    pub fn custom(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if !(dim == 2 || dim == 4) || entries.len() != dim * dim {
            return Err(Error::CoinDimension { expected: dim * dim, got: entries.len() });
        }
        let coin = CoinOperator { dim, entries, kind: CoinKind::Custom };
        let deviation = coin.unitarity_deviation();
        if deviation > UNITARITY_TOL {
            return Err(Error::NonUnitaryCoin { deviation });
        }
        Ok(coin)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CoinKind {
        self.kind
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `‖C·C† − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(i, k) * self.entry(j, k).conj();
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `out = C · input`.
    #[inline]
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for (row, o) in out.iter_mut().enumerate().take(d) {
            let r = &self.entries[row * d..row * d + d];
            *o = r.iter().zip(input).map(|(a, b)| a * b).sum();
        }
    }
}

/// Initial coin state used with each preset coin.
///
/// The 2D vectors give position distributions symmetric about `y = x` and
/// `y = −x`; the 1D vector `(|0⟩ + i|1⟩)/√2` gives a left-right symmetric walk.
pub fn initial_coin(kind: CoinKind) -> Vec<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let s = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    match kind {
        CoinKind::Grover => vec![c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0)],
        CoinKind::Fourier => vec![c(0.5, 0.0), c(s, -s), c(0.5, 0.0), c(-s, s)],
        CoinKind::Hadamard => vec![c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0)],
        CoinKind::Hadamard2 | CoinKind::Custom => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![c(h, 0.0), c(0.0, h)]
        }
    }
}
