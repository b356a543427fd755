//! Jump-length distributions, truncation, and seeded realizations.
//!
//! Jumps are drawn from the distribution conditioned on `k ≤ R`, where `R`
//! is the smallest radius whose upper tail mass is at most the tail bound.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{self, WalkRng};

/// Default upper-tail mass allowed beyond the truncation radius.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-4;

const MAX_RADIUS: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Poisson {
        lambda: f64,
    },
    Binomial {
        n: u64,
        p: f64,
    },
    /// `n` draws without replacement from `N` items of which `m` are successes.
    Hypergeometric {
        #[serde(rename = "N")]
        population: u64,
        #[serde(rename = "m")]
        successes: u64,
        #[serde(rename = "n")]
        draws: u64,
    },
    /// Failures before the `r`-th success.
    NegativeBinomial {
        r: u64,
        p: f64,
    },
    /// Failures before the first success.
    Geometric {
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionMoments {
    pub mean: f64,
    pub variance: f64,
    /// variance / mean
    pub fano: f64,
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

fn probability(name: &'static str, p: f64, allow_zero: bool) -> Result<()> {
    let lower_ok = if allow_zero { p >= 0.0 } else { p > 0.0 };
    if lower_ok && p <= 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not a valid probability")))
    }
}

/// `ln C(n, k)`, exact for `n ≤ 20`.
fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= 20 {
        let k = k.min(n - k);
        let mut c: u64 = 1;
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        (c as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Poisson { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("lambda", format!("{lambda} must be positive")));
                }
            }
            Distribution::Binomial { n, p } => {
                if n == 0 {
                    return Err(invalid("n", "must be at least 1"));
                }
                probability("p", p, true)?;
            }
            Distribution::Hypergeometric { population, successes, draws } => {
                if population == 0 {
                    return Err(invalid("N", "must be at least 1"));
                }
                if successes > population {
                    return Err(invalid("m", format!("{successes} exceeds N = {population}")));
                }
                if draws == 0 || draws > population {
                    return Err(invalid("n", format!("{draws} must lie in 1..={population}")));
                }
            }
            Distribution::NegativeBinomial { r, p } => {
                if r == 0 {
                    return Err(invalid("r", "must be at least 1"));
                }
                probability("p", p, false)?;
            }
            Distribution::Geometric { p } => probability("p", p, false)?,
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Poisson { .. } => "poisson",
            Distribution::Binomial { .. } => "binomial",
            Distribution::Hypergeometric { .. } => "hypergeometric",
            Distribution::NegativeBinomial { .. } => "negative-binomial",
            Distribution::Geometric { .. } => "geometric",
        }
    }

    /// Inclusive support bounds; `None` upper bound means unbounded.
    pub fn support(&self) -> (u64, Option<u64>) {
        match *self {
            Distribution::Binomial { n, .. } => (0, Some(n)),
            Distribution::Hypergeometric { population, successes, draws } => {
                let lo = (draws + successes).saturating_sub(population);
                (lo, Some(successes.min(draws)))
            }
            _ => (0, None),
        }
    }

    /// Probability mass of the untruncated distribution at `k`.
    pub fn pmf(&self, k: u64) -> f64 {
        let (lo, hi) = self.support();
        if k < lo || hi.is_some_and(|hi| k > hi) {
            return 0.0;
        }
        let kf = k as f64;
        match *self {
            Distribution::Poisson { lambda } => (-lambda + kf * lambda.ln() - ln_gamma(kf + 1.0)).exp(),
            Distribution::Binomial { n, p } => {
                // powi keeps the degenerate p ∈ {0, 1} cases exact
                let (k32, rest) = (k as i32, (n - k) as i32);
                ln_choose(n, k).exp() * p.powi(k32) * (1.0 - p).powi(rest)
            }
            Distribution::Hypergeometric { population, successes, draws } => (ln_choose(successes, k)
                + ln_choose(population - successes, draws - k)
                - ln_choose(population, draws))
            .exp(),
            Distribution::NegativeBinomial { r, p } => {
                ln_choose(k + r - 1, r - 1).exp() * p.powi(r as i32) * (1.0 - p).powf(kf)
            }
            Distribution::Geometric { p } => (1.0 - p).powf(kf) * p,
        }
    }

    /// Closed-form mean and variance of the untruncated distribution.
    pub fn exact_moments(&self) -> DistributionMoments {
        let (mean, variance) = match *self {
            Distribution::Poisson { lambda } => (lambda, lambda),
            Distribution::Binomial { n, p } => {
                let n = n as f64;
                (n * p, n * p * (1.0 - p))
            }
            Distribution::Hypergeometric { population, successes, draws } => {
                let (big_n, m, n) = (population as f64, successes as f64, draws as f64);
                let frac = m / big_n;
                let var = if population > 1 {
                    n * frac * (1.0 - frac) * (big_n - n) / (big_n - 1.0)
                } else {
                    0.0
                };
                (n * frac, var)
            }
            Distribution::NegativeBinomial { r, p } => {
                let r = r as f64;
                (r * (1.0 - p) / p, r * (1.0 - p) / (p * p))
            }
            Distribution::Geometric { p } => ((1.0 - p) / p, (1.0 - p) / (p * p)),
        };
        DistributionMoments { mean, variance, fano: variance / mean }
    }

    /// Smallest `R` with `P(X > R) ≤ tail_bound`.
    pub fn truncation_radius(&self, tail_bound: f64) -> u32 {
        let (_, hi) = self.support();
        let mut cdf = 0.0;
        for k in 0..MAX_RADIUS {
            cdf += self.pmf(k as u64);
            if hi.is_some_and(|hi| k as u64 >= hi) || 1.0 - cdf <= tail_bound {
                return k;
            }
        }
        MAX_RADIUS
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Poisson { lambda } => write!(f, "poisson:lambda={lambda}"),
            Distribution::Binomial { n, p } => write!(f, "binomial:n={n},p={p}"),
            Distribution::Hypergeometric { population, successes, draws } => {
                write!(f, "hypergeometric:N={population},m={successes},n={draws}")
            }
            Distribution::NegativeBinomial { r, p } => write!(f, "negative-binomial:r={r},p={p}"),
            Distribution::Geometric { p } => write!(f, "geometric:p={p}"),
        }
    }
}

/// Parses `KIND:key=value,...`, e.g. `poisson:lambda=1` or
/// `hypergeometric:N=20,m=5,n=4`.
impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut pairs = Vec::new();
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::ParseDisorder(s.to_string()))?;
            pairs.push((k.trim(), v.trim()));
        }
        let get = |name: &'static str| -> Result<&str> {
            pairs
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| invalid(name, "missing"))
        };
        let float = |name: &'static str| -> Result<f64> {
            get(name)?.parse().map_err(|_| invalid(name, "not a number"))
        };
        let int = |name: &'static str| -> Result<u64> {
            get(name)?.parse().map_err(|_| invalid(name, "not a nonnegative integer"))
        };
        let dist = match kind.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "poisson" => Distribution::Poisson { lambda: float("lambda")? },
            "binomial" => Distribution::Binomial { n: int("n")?, p: float("p")? },
            "hypergeometric" => Distribution::Hypergeometric {
                population: int("N")?,
                successes: int("m")?,
                draws: int("n")?,
            },
            "negative-binomial" | "negbinomial" => {
                Distribution::NegativeBinomial { r: int("r")?, p: float("p")? }
            }
            "geometric" => Distribution::Geometric { p: float("p")? },
            _ => return Err(Error::ParseDisorder(s.to_string())),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// A validated distribution together with its truncation radius and the
/// cumulative table used for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSpec {
    distribution: Distribution,
    tail_bound: f64,
    radius: u32,
    cdf: Vec<f64>,
}

impl DisorderSpec {
    pub fn new(distribution: Distribution, tail_bound: f64) -> Result<Self> {
        distribution.validate()?;
        if !(tail_bound > 0.0 && tail_bound < 1.0) {
            return Err(invalid("tail_bound", format!("{tail_bound} must lie in (0, 1)")));
        }
        let radius = distribution.truncation_radius(tail_bound);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (0..=radius as u64)
            .map(|k| {
                acc += distribution.pmf(k);
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        *cdf.last_mut().expect("radius table is nonempty") = 1.0;
        Ok(DisorderSpec { distribution, tail_bound, radius, cdf })
    }

    pub fn with_default_tail(distribution: Distribution) -> Result<Self> {
        Self::new(distribution, DEFAULT_TAIL_BOUND)
    }

    pub fn distribution(&self) -> &Distribution {
        &self.distribution
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn truncation_radius(&self) -> u32 {
        self.radius
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.distribution.pmf(k)
    }

    /// Mass of the truncated (renormalized) distribution at `k`.
    pub fn truncated_pmf(&self, k: u64) -> f64 {
        if k > self.radius as u64 {
            return 0.0;
        }
        let k = k as usize;
        self.cdf[k] - if k == 0 { 0.0 } else { self.cdf[k - 1] }
    }

    pub fn exact_moments(&self) -> DistributionMoments {
        self.distribution.exact_moments()
    }

    /// One jump length, drawn by inverting the truncated CDF.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u) as u32
    }

    pub fn sample_sequence(&self, steps: usize, seed: u64) -> JumpSequence {
        let mut rng = rng::seeded(seed);
        let mut seq = self.sample_sequence_with(steps, &mut rng);
        seq.seed = seed;
        seq
    }

    pub fn sample_sequence_with<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> JumpSequence {
        let values = (0..steps).map(|_| self.sample_jump(rng)).collect();
        JumpSequence { values, seed: 0 }
    }

    /// A static field covering `[−radius, radius]^dim`, grown lazily later.
    pub fn sample_field(&self, dim: usize, radius: usize, seed: u64) -> JumpField {
        JumpField::sampled(self.clone(), dim, radius, rng::seeded(seed), seed)
    }
}

/// Per-step jump lengths of one dynamic-disorder realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpSequence {
    pub values: Vec<u32>,
    pub seed: u64,
}

impl JumpSequence {
    pub fn constant(jump: u32, steps: usize) -> Self {
        JumpSequence { values: vec![jump; steps], seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-vertex jump lengths of one static-disorder realization.
///
/// Values are drawn ring by ring (by Chebyshev radius, row-major within a
/// ring) from a single stream, so the value at a vertex does not depend on
/// when the field was grown to reach it.
#[derive(Debug, Clone)]
pub struct JumpField {
    dim: usize,
    radius: usize,
    values: Vec<u32>,
    source: Option<(DisorderSpec, WalkRng)>,
    seed: u64,
}

impl JumpField {
    fn sampled(spec: DisorderSpec, dim: usize, radius: usize, rng: WalkRng, seed: u64) -> Self {
        assert!(dim == 1 || dim == 2, "lattice dimension must be 1 or 2");
        let mut field = JumpField { dim, radius: 0, values: Vec::new(), source: Some((spec, rng)), seed };
        field.values = vec![0; 1];
        field.fill_ring(0);
        field.grow_to(radius).expect("sampled fields can always grow");
        field
    }

    /// Field for realization `index` of an ensemble keyed by `master`.
    pub fn for_realization(spec: &DisorderSpec, dim: usize, radius: usize, master: u64, index: u64) -> Self {
        Self::sampled(spec.clone(), dim, radius, rng::realization_stream(master, index), master)
    }

    /// A fixed field over `[−radius, radius]^dim` in row-major order (y outer).
    pub fn from_values(dim: usize, radius: usize, values: Vec<u32>) -> Result<Self> {
        let side = 2 * radius + 1;
        let expected = if dim == 1 { side } else { side * side };
        if values.len() != expected {
            return Err(Error::Config(format!("field needs {expected} values, got {}", values.len())));
        }
        Ok(JumpField { dim, radius, values, source: None, seed: 0 })
    }

    pub fn constant(dim: usize, radius: usize, jump: u32) -> Self {
        let side = 2 * radius + 1;
        let n = if dim == 1 { side } else { side * side };
        JumpField { dim, radius, values: vec![jump; n], source: None, seed: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    fn index(&self, x: i64, y: i64) -> usize {
        let r = self.radius as i64;
        if self.dim == 1 {
            (x + r) as usize
        } else {
            ((y + r) * (2 * r + 1) + (x + r)) as usize
        }
    }

    /// Jump at `(x, y)`; `y` is ignored in 1D. Vertices must lie within the radius.
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> u32 {
        self.values[self.index(x, y)]
    }

    /// Grows the field to cover `radius`; fixed fields error.
    pub fn grow_to(&mut self, radius: usize) -> Result<()> {
        if radius <= self.radius {
            return Ok(());
        }
        if self.source.is_none() {
            return Err(Error::FieldTooSmall { have: self.radius, need: radius });
        }
        let old_r = self.radius as i64;
        let old_side = 2 * old_r + 1;
        let side = 2 * radius + 1;
        let n = if self.dim == 1 { side } else { side * side };
        let mut values = vec![0; n];
        let r = radius as i64;
        let rows = if self.dim == 1 { 1 } else { old_side };
        for row in 0..rows {
            let src = (row * old_side) as usize;
            let dst_row = if self.dim == 1 { 0 } else { row + (r - old_r) };
            let dst = (dst_row * side as i64 + (r - old_r)) as usize;
            values[dst..dst + old_side as usize].copy_from_slice(&self.values[src..src + old_side as usize]);
        }
        self.values = values;
        self.radius = radius;
        for ring in old_r + 1..=r {
            self.fill_ring(ring);
        }
        Ok(())
    }

    fn fill_ring(&mut self, ring: i64) {
        let (spec, mut rng) = match self.source.take() {
            Some(s) => s,
            None => return,
        };
        if self.dim == 1 {
            for x in [-ring, ring] {
                let i = self.index(x, 0);
                self.values[i] = spec.sample_jump(&mut rng);
                if ring == 0 {
                    break;
                }
            }
        } else {
            for y in -ring..=ring {
                for x in -ring..=ring {
                    if x.abs().max(y.abs()) == ring {
                        let i = self.index(x, y);
                        self.values[i] = spec.sample_jump(&mut rng);
                    }
                }
            }
        }
        self.source = Some((spec, rng));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: Distribution) -> DisorderSpec {
        DisorderSpec::with_default_tail(d).unwrap()
    }

    #[test]
    fn pmf_values() {
        let p = Distribution::Poisson { lambda: 1.0 };
        assert!((p.pmf(0) - (-1.0f64).exp()).abs() < 1e-15);
        let b = Distribution::Binomial { n: 5, p: 0.2 };
        assert!((b.pmf(5) - 3.2e-4).abs() < 1e-16);
        let h = Distribution::Hypergeometric { population: 20, successes: 5, draws: 4 };
        assert_eq!(h.pmf(5), 0.0);
        assert_eq!(h.pmf(17), 0.0);
    }

    #[test]
    fn truncation_radii() {
        assert_eq!(spec(Distribution::Poisson { lambda: 1.0 }).truncation_radius(), 6);
        assert_eq!(spec(Distribution::Binomial { n: 5, p: 0.2 }).truncation_radius(), 5);
        assert_eq!(spec(Distribution::Geometric { p: 0.5 }).truncation_radius(), 13);
    }

    #[test]
    fn exact_moments_match_unit_mean_choices() {
        let m = Distribution::Poisson { lambda: 1.0 }.exact_moments();
        assert_eq!((m.mean, m.variance, m.fano), (1.0, 1.0, 1.0));
        let m = Distribution::Binomial { n: 5, p: 0.2 }.exact_moments();
        assert!((m.mean - 1.0).abs() < 1e-15 && (m.variance - 0.8).abs() < 1e-15);
        let m = Distribution::Geometric { p: 0.5 }.exact_moments();
        assert_eq!((m.mean, m.variance), (1.0, 2.0));
        let m = Distribution::NegativeBinomial { r: 1, p: 0.5 }.exact_moments();
        assert_eq!((m.mean, m.variance), (1.0, 2.0));
        let m = Distribution::Hypergeometric { population: 20, successes: 5, draws: 4 }.exact_moments();
        assert!((m.mean - 1.0).abs() < 1e-15);
        assert!((m.variance - 12.0 / 19.0).abs() < 1e-15);
        assert!(m.fano < 1.0);
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let bad = [
            (Distribution::Poisson { lambda: 0.0 }, "lambda"),
            (Distribution::Binomial { n: 5, p: 1.5 }, "p"),
            (Distribution::Hypergeometric { population: 5, successes: 6, draws: 1 }, "m"),
            (Distribution::Hypergeometric { population: 5, successes: 2, draws: 0 }, "n"),
            (Distribution::NegativeBinomial { r: 0, p: 0.5 }, "r"),
            (Distribution::Geometric { p: 0.0 }, "p"),
        ];
        for (d, field) in bad {
            match d.validate() {
                Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, field),
                other => panic!("{d:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "poisson:lambda=0.7",
            "binomial:n=5,p=0.2",
            "hypergeometric:N=20,m=5,n=4",
            "negative-binomial:r=1,p=0.5",
            "geometric:p=0.5",
        ] {
            let d: Distribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!(matches!("poisson:lambda=-1".parse::<Distribution>(), Err(Error::InvalidParameter { name: "lambda", .. })));
        assert!(matches!("binomial:p=0.2".parse::<Distribution>(), Err(Error::InvalidParameter { name: "n", .. })));
        assert!(matches!("cauchy:x=1".parse::<Distribution>(), Err(Error::ParseDisorder(_))));
    }

    #[test]
    fn degenerate_binomial_always_one() {
        let s = spec(Distribution::Binomial { n: 1, p: 1.0 });
        let seq = s.sample_sequence(200, 9);
        assert!(seq.values.iter().all(|&j| j == 1));
    }

    #[test]
    fn sequences_are_seeded() {
        let s = spec(Distribution::Poisson { lambda: 1.0 });
        assert_eq!(s.sample_sequence(50, 11), s.sample_sequence(50, 11));
        assert_ne!(s.sample_sequence(50, 11).values, s.sample_sequence(50, 12).values);
        assert!(s.sample_sequence(1000, 3).values.iter().all(|&j| j <= 6));
    }

    #[test]
    fn field_size_and_bounds() {
        let s = spec(Distribution::Poisson { lambda: 1.0 });
        let f = s.sample_field(2, 2, 5);
        assert_eq!(f.values().len(), 25);
        assert!(f.values().iter().all(|&j| j <= 6));
        assert_eq!(s.sample_field(1, 2, 5).values().len(), 5);
    }

    #[test]
    fn field_growth_is_path_independent() {
        let s = spec(Distribution::Geometric { p: 0.5 });
        let direct = s.sample_field(2, 6, 77);
        let mut grown = s.sample_field(2, 1, 77);
        grown.grow_to(3).unwrap();
        grown.grow_to(6).unwrap();
        assert_eq!(direct.values(), grown.values());

        let direct = s.sample_field(1, 6, 77);
        let mut grown = s.sample_field(1, 0, 77);
        grown.grow_to(4).unwrap();
        grown.grow_to(6).unwrap();
        assert_eq!(direct.values(), grown.values());
        assert_eq!(direct.get(-6, 0), grown.get(-6, 123));
    }

    #[test]
    fn fixed_field_cannot_grow() {
        let mut f = JumpField::constant(2, 1, 1);
        assert_eq!(f.grow_to(2), Err(Error::FieldTooSmall { have: 1, need: 2 }));
    }
}
