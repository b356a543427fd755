//! Position distributions, spread moments, and power-law fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Probability per lattice site over `[−radius, radius]^dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    dim: usize,
    radius: usize,
    t: usize,
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn new(dim: usize, radius: usize, t: usize, probs: Vec<f64>) -> Self {
        let side = 2 * radius + 1;
        let n = if dim == 1 { side } else { side * side };
        assert_eq!(probs.len(), n, "distribution size does not match its radius");
        PositionDistribution { dim, radius, t, probs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        let r = self.radius as i64;
        if x.abs() > r || y.abs() > r || (self.dim == 1 && y != 0) {
            return 0.0;
        }
        if self.dim == 1 {
            self.probs[(x + r) as usize]
        } else {
            self.probs[((y + r) * (2 * r + 1) + (x + r)) as usize]
        }
    }

    /// `(x, y, p)` for every site; `y = 0` in 1D.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let r = self.radius as i64;
        let side = 2 * self.radius + 1;
        let dim = self.dim;
        self.probs.iter().enumerate().map(move |(i, &p)| {
            if dim == 1 {
                (i as i64 - r, 0, p)
            } else {
                ((i % side) as i64 - r, (i / side) as i64 - r, p)
            }
        })
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Radial moment `Σ (x² + y²)^{k/2} P / Σ P` (`|x|^k` in 1D).
    pub fn moment(&self, k: u32) -> Result<f64> {
        if !(k == 1 || k == 2) {
            return Err(Error::MomentOrder(k));
        }
        let total = self.total();
        let sum: f64 = self
            .iter()
            .map(|(x, y, p)| {
                let r2 = (x * x + y * y) as f64;
                if k == 2 { r2 * p } else { r2.sqrt() * p }
            })
            .sum();
        Ok(if total > 0.0 { sum / total } else { 0.0 })
    }

    pub fn spread(&self) -> Spread {
        let mut acc = Spread::accumulator(self.dim);
        self.iter().for_each(|(x, y, p)| acc.add(x, y, p));
        acc.finish()
    }

    /// `max |P(x, y) − P(y, x)|`.
    pub fn diagonal_asymmetry(&self) -> f64 {
        self.iter().map(|(x, y, p)| (p - self.get(y, x)).abs()).fold(0.0, f64::max)
    }

    /// `max |P(x, y) − P(−x, −y)|`.
    pub fn inversion_asymmetry(&self) -> f64 {
        self.iter().map(|(x, y, p)| (p - self.get(-x, -y)).abs()).fold(0.0, f64::max)
    }
}

/// Moments of a position distribution after renormalizing it to unit mass.
///
/// In 2D `mean` and `second` are the radial moments `m₁ = ⟨r⟩`, `m₂ = ⟨r²⟩`
/// and `sigma = √(m₂ − m₁²)`. In 1D `mean` is the signed mean position
/// `⟨x⟩`, so `sigma` is the ordinary standard deviation of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    /// Mass before renormalization.
    pub total: f64,
    pub mean: f64,
    pub second: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct SpreadAccumulator {
    dim: usize,
    total: f64,
    first: f64,
    second: f64,
}

impl Spread {
    pub fn accumulator(dim: usize) -> SpreadAccumulator {
        SpreadAccumulator { dim, total: 0.0, first: 0.0, second: 0.0 }
    }
}

impl SpreadAccumulator {
    #[inline]
    pub fn add(&mut self, x: i64, y: i64, p: f64) {
        if p == 0.0 {
            return;
        }
        let r2 = (x * x + y * y) as f64;
        self.total += p;
        self.second += r2 * p;
        self.first += if self.dim == 1 { x as f64 * p } else { r2.sqrt() * p };
    }

    pub fn finish(self) -> Spread {
        if self.total <= 0.0 {
            return Spread { total: self.total, mean: 0.0, second: 0.0, sigma: 0.0 };
        }
        let mean = self.first / self.total;
        let second = self.second / self.total;
        let sigma = (second - mean * mean).max(0.0).sqrt();
        Spread { total: self.total, mean, second, sigma }
    }
}

/// Moments of one distribution in a time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub t: usize,
    pub m1: f64,
    pub m2: f64,
    pub sigma: f64,
}

pub type MomentSeries = Vec<MomentPoint>;

/// Least-squares fit of `ln(1/σ) = −α ln t + c` over `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval on `alpha`.
    pub ci95: f64,
    /// Mean squared residual.
    pub lsq_error: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

pub fn fit_exponent(series: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<ScalingFit> {
    let window: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t_min && t <= t_max).collect();
    let degenerate = || Error::DegenerateWindow { t_min: t_min as usize, t_max: t_max as usize, points: window.len() };
    if window.len() < 3 {
        return Err(degenerate());
    }
    if let Some(&(t, sigma)) = window.iter().find(|(_, s)| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::NonPositiveSigma { t: t as usize, sigma });
    }
    let n = window.len() as f64;
    let xs: Vec<f64> = window.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, s)| (1.0 / s).ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(degenerate());
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = n - 2.0;
    let se = (ssr / dof / sxx).sqrt();
    let quantile = StudentsT::new(0.0, 1.0, dof).expect("dof > 0").inverse_cdf(0.975);
    Ok(ScalingFit {
        alpha: -slope,
        intercept,
        ci95: quantile * se,
        lsq_error: ssr / n,
        t_min,
        t_max,
        points: window.len(),
    })
}

/// `x` rounded to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Per-index mean of equally long series. Each column is summed in sorted
/// order, so the result does not depend on the order of `runs`.
pub fn mean_series(runs: &[Vec<f64>]) -> Vec<f64> {
    let Some(len) = runs.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut column = Vec::with_capacity(runs.len());
    (0..len)
        .map(|t| {
            column.clear();
            column.extend(runs.iter().map(|r| r[t]));
            column.sort_by(f64::total_cmp);
            column.iter().sum::<f64>() / runs.len() as f64
        })
        .collect()
}
