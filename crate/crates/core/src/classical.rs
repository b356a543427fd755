//! Classical random walk on the square lattice: closed-form probabilities,
//! the Gaussian approximant, and the jump-length iterative map.

use statrs::function::gamma::ln_gamma;

use crate::disorder::DisorderSpec;
use crate::error::Result;
use crate::rng;
use crate::stats::{MomentPoint, MomentSeries, PositionDistribution, Spread};

/// Largest `t` for which [`crw_exact_count`] fits in `u128`.
pub const MAX_EXACT_T: usize = 60;

fn choose(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of the `4^t` nearest-neighbour paths of length `t` that end at
/// `(x, y)`: `C(t, (t+x+y)/2) · C(t, (t+x−y)/2)` when `x + y ≡ t (mod 2)` and
/// `|x| + |y| ≤ t`, otherwise 0.
pub fn crw_exact_count(t: usize, x: i64, y: i64) -> u128 {
    assert!(t <= MAX_EXACT_T, "exact counts overflow beyond t = {MAX_EXACT_T}");
    let t_i = t as i64;
    if x.abs() + y.abs() > t_i || (t_i + x + y).rem_euclid(2) != 0 {
        return 0;
    }
    let a = ((t_i + x + y) / 2) as u128;
    let b = ((t_i + x - y) / 2) as u128;
    choose(t as u128, a) * choose(t as u128, b)
}

/// Probability of the clean walk being at `(x, y)` after `t` steps. Exact
/// integer counts up to [`MAX_EXACT_T`], log-gamma beyond.
pub fn crw_exact(t: usize, x: i64, y: i64) -> f64 {
    if t <= MAX_EXACT_T {
        return crw_exact_count(t, x, y) as f64 / 4f64.powi(t as i32);
    }
    let t_i = t as i64;
    if x.abs() + y.abs() > t_i || (t_i + x + y).rem_euclid(2) != 0 {
        return 0.0;
    }
    let ln_choose = |n: f64, k: f64| ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
    let tf = t as f64;
    let a = ((t_i + x + y) / 2) as f64;
    let b = ((t_i + x - y) / 2) as f64;
    (ln_choose(tf, a) + ln_choose(tf, b) - tf * 4f64.ln()).exp()
}

/// Large-`t` approximant `(2/πt)·exp(−(x² + y²)/t)`, valid on the sites of
/// the right parity. For validation only.
pub fn crw_asymptotic(t: usize, x: i64, y: i64) -> f64 {
    let t = t as f64;
    2.0 / (std::f64::consts::PI * t) * (-((x * x + y * y) as f64) / t).exp()
}

/// Square-lattice grid `[−radius, radius]²`, row-major, y outer.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    radius: usize,
    cells: Vec<T>,
}

impl<T: Copy + Default> Grid<T> {
    fn point(value: T) -> Self {
        Grid { radius: 0, cells: vec![value] }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn get(&self, x: i64, y: i64) -> T {
        let r = self.radius as i64;
        if x.abs() > r || y.abs() > r {
            return T::default();
        }
        self.cells[((y + r) * (2 * r + 1) + (x + r)) as usize]
    }

    /// `out(x, y) = combine(in(x−J, y), in(x+J, y), in(x, y−J), in(x, y+J))`
    /// on a grid grown by `jump`.
    fn spread_by(&self, jump: u32, combine: impl Fn(T, T, T, T) -> T) -> Self {
        let j = jump as i64;
        let radius = self.radius + jump as usize;
        let r = radius as i64;
        let mut cells = Vec::with_capacity((2 * radius + 1).pow(2));
        for y in -r..=r {
            for x in -r..=r {
                cells.push(combine(self.get(x - j, y), self.get(x + j, y), self.get(x, y - j), self.get(x, y + j)));
            }
        }
        Grid { radius, cells }
    }
}

/// Classical position distribution in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    pub t: usize,
    grid: Grid<f64>,
}

impl ClassicalDistribution {
    pub fn point_mass() -> Self {
        ClassicalDistribution { t: 0, grid: Grid::point(1.0) }
    }

    pub fn radius(&self) -> usize {
        self.grid.radius()
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        self.grid.get(x, y)
    }

    pub fn total(&self) -> f64 {
        self.grid.cells.iter().sum()
    }

    pub fn to_position_distribution(&self) -> PositionDistribution {
        PositionDistribution::new(2, self.grid.radius, self.t, self.grid.cells.clone())
    }

    pub fn spread(&self) -> Spread {
        let mut acc = Spread::accumulator(2);
        let r = self.grid.radius as i64;
        let side = 2 * self.grid.radius + 1;
        for (i, &p) in self.grid.cells.iter().enumerate() {
            acc.add((i % side) as i64 - r, (i / side) as i64 - r, p);
        }
        acc.finish()
    }
}

/// One step of the map `P'(x,y) = ¼[P(x−J,y) + P(x+J,y) + P(x,y−J) + P(x,y+J)]`.
pub fn crw_disordered_step(p: &ClassicalDistribution, jump: u32) -> ClassicalDistribution {
    if jump == 0 {
        return ClassicalDistribution { t: p.t + 1, grid: p.grid.clone() };
    }
    // quarter-weighting is exact in binary floating point
    let grid = p.grid.spread_by(jump, |a, b, c, d| 0.25 * a + 0.25 * b + 0.25 * c + 0.25 * d);
    ClassicalDistribution { t: p.t + 1, grid }
}

/// Exact classical distribution: path counts over the common denominator `4^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactClassical {
    pub t: usize,
    grid: Grid<u128>,
}

impl ExactClassical {
    pub fn point_mass() -> Self {
        ExactClassical { t: 0, grid: Grid::point(1) }
    }

    pub fn step(&self, jump: u32) -> Self {
        let grid = if jump == 0 { self.grid.spread_by(0, |a, _, _, _| 4 * a) } else { self.grid.spread_by(jump, |a, b, c, d| a + b + c + d) };
        ExactClassical { t: self.t + 1, grid }
    }

    /// Numerator of `P(x, y)` over `4^t`.
    pub fn count(&self, x: i64, y: i64) -> u128 {
        self.grid.get(x, y)
    }

    pub fn denominator(&self) -> u128 {
        4u128.pow(self.t as u32)
    }

    pub fn radius(&self) -> usize {
        self.grid.radius()
    }
}

/// σ(t) series of a sequence of classical distributions.
pub fn crw_sigma(distributions: &[ClassicalDistribution]) -> MomentSeries {
    distributions
        .iter()
        .map(|d| {
            let s = d.spread();
            MomentPoint { t: d.t, m1: s.mean, m2: s.second, sigma: s.sigma }
        })
        .collect()
}

/// σ(t) for `t = 0..=steps` of one classical realization. `None` gives the
/// clean walk (unit jumps).
pub fn classical_sigma_series(spec: Option<&DisorderSpec>, steps: usize, master: u64, index: u64) -> Result<Vec<f64>> {
    let mut stream = rng::realization_stream(master, index);
    let mut p = ClassicalDistribution::point_mass();
    let mut sigma = Vec::with_capacity(steps + 1);
    sigma.push(p.spread().sigma);
    for _ in 0..steps {
        let jump = spec.map_or(1, |s| s.sample_jump(&mut stream));
        p = crw_disordered_step(&p, jump);
        sigma.push(p.spread().sigma);
    }
    Ok(sigma)
}
