//! Walker state and one-step evolution `U = S(I ⊗ C)`.
//!
//! Amplitudes live in a dense row-major array over the square `[−ρ, ρ]²`
//! (or the interval `[−ρ, ρ]` in 1D), coin index fastest. The half-width
//! `ρ` grows by the realized jump each step.

use num_complex::Complex64;

use crate::coin::{self, CoinKind, CoinOperator};
use crate::disorder::{JumpField, JumpSequence};
use crate::error::{Error, Result};
use crate::stats::{PositionDistribution, Spread};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Displacement direction of each coin basis state, `(dx, dy)`.
pub const DIRECTIONS_2D: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub const DIRECTIONS_1D: [(i64, i64); 2] = [(1, 0), (-1, 0)];

#[derive(Debug, Clone)]
pub struct WalkerState {
    dim: usize,
    t: usize,
    rho: usize,
    amps: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PartialEq for WalkerState {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.t == other.t && self.rho == other.rho && self.amps == other.amps
    }
}

impl WalkerState {
    /// Walker at the origin with the given coin amplitudes; `dim` is 1 or 2.
    pub fn new(dim: usize, coin_amplitudes: &[Complex64]) -> Result<Self> {
        let coins = coin_count(dim)?;
        if coin_amplitudes.len() != coins {
            return Err(Error::CoinDimension { expected: coins, got: coin_amplitudes.len() });
        }
        let norm_sqr: f64 = coin_amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > coin::NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(WalkerState { dim, t: 0, rho: 0, amps: coin_amplitudes.to_vec(), scratch: Vec::new() })
    }

    /// Walker at the origin in the preset initial coin state for `kind`.
    pub fn preset(kind: CoinKind) -> Self {
        let dim = if kind == CoinKind::Hadamard2 { 1 } else { 2 };
        Self::new(dim, &coin::initial_coin(kind)).expect("preset coin states are normalized")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coins(&self) -> usize {
        2 * self.dim
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Half-width of the populated region.
    pub fn rho(&self) -> usize {
        self.rho
    }

    fn side(&self) -> usize {
        2 * self.rho + 1
    }

    fn site_index(&self, x: i64, y: i64) -> usize {
        let r = self.rho as i64;
        if self.dim == 1 {
            (x + r) as usize
        } else {
            ((y + r) * (2 * r + 1) + (x + r)) as usize
        }
    }

    /// Amplitude of coin state `c` at `(x, y)`; zero outside the region.
    pub fn amplitude(&self, x: i64, y: i64, c: usize) -> Complex64 {
        let r = self.rho as i64;
        if x.abs() > r || y.abs() > r || (self.dim == 1 && y != 0) || c >= self.coins() {
            return ZERO;
        }
        self.amps[self.site_index(x, y) * self.coins() + c]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Visits every site of the region with its coin amplitudes.
    fn for_each_site(&self, mut f: impl FnMut(i64, i64, &[Complex64])) {
        let r = self.rho as i64;
        let coins = self.coins();
        let side = self.side();
        for (i, chunk) in self.amps.chunks_exact(coins).enumerate() {
            let (x, y) = if self.dim == 1 { (i as i64 - r, 0) } else { ((i % side) as i64 - r, (i / side) as i64 - r) };
            f(x, y, chunk);
        }
    }

    /// Applies `(I ⊗ C)` then shifts every coin component by `jump` along its
    /// direction. A jump of 1 is the clean shift; 0 leaves positions unchanged.
    pub fn step(&mut self, coin: &CoinOperator, jump: u32) {
        self.shift_with(coin, jump as usize, |_, _| jump as i64);
    }

    /// Applies `(I ⊗ C)` then shifts the amplitude at each vertex by that
    /// vertex's jump. Amplitudes landing on one site accumulate, so the map
    /// need not be unitary; the squared norm after the step is returned.
    pub fn step_static(&mut self, coin: &CoinOperator, field: &JumpField) -> Result<f64> {
        if field.radius() < self.rho {
            return Err(Error::FieldTooSmall { have: field.radius(), need: self.rho });
        }
        if field.dim() != self.dim {
            return Err(Error::Config(format!("{}D field for a {}D walker", field.dim(), self.dim)));
        }
        let mut reach = 0;
        self.for_each_site(|x, y, amps| {
            if amps.iter().any(|a| *a != ZERO) {
                reach = reach.max(field.get(x, y));
            }
        });
        self.shift_with(coin, reach as usize, |x, y| field.get(x, y) as i64);
        Ok(self.norm_sqr())
    }

    fn shift_with(&mut self, coin: &CoinOperator, reach: usize, jump_at: impl Fn(i64, i64) -> i64) {
        assert_eq!(coin.dim(), self.coins(), "coin dimension does not match the lattice");
        let coins = self.coins();
        let old_r = self.rho as i64;
        let old_side = self.side();
        let new_rho = self.rho + reach;
        let new_r = new_rho as i64;
        let new_side = 2 * new_rho + 1;
        let sites = if self.dim == 1 { new_side } else { new_side * new_side };

        let mut next = std::mem::take(&mut self.scratch);
        next.clear();
        next.resize(sites * coins, ZERO);

        let dirs: &[(i64, i64)] = if self.dim == 1 { &DIRECTIONS_1D } else { &DIRECTIONS_2D };
        let mut rotated = [ZERO; 4];
        for (i, src) in self.amps.chunks_exact(coins).enumerate() {
            if src.iter().all(|a| *a == ZERO) {
                continue;
            }
            let (x, y) = if self.dim == 1 {
                (i as i64 - old_r, 0)
            } else {
                ((i % old_side) as i64 - old_r, (i / old_side) as i64 - old_r)
            };
            coin.apply(src, &mut rotated[..coins]);
            let jump = jump_at(x, y);
            for (c, &(dx, dy)) in dirs.iter().enumerate() {
                let (tx, ty) = (x + dx * jump, y + dy * jump);
                let site = if self.dim == 1 {
                    (tx + new_r) as usize
                } else {
                    ((ty + new_r) * new_side as i64 + (tx + new_r)) as usize
                };
                next[site * coins + c] += rotated[c];
            }
        }

        self.scratch = std::mem::replace(&mut self.amps, next);
        self.rho = new_rho;
        self.t += 1;
    }

    /// `P(x, y) = Σ_j |ψ^j(x, y)|²` over the populated region.
    pub fn position_distribution(&self) -> PositionDistribution {
        let coins = self.coins();
        let probs = self.amps.chunks_exact(coins).map(|c| c.iter().map(|a| a.norm_sqr()).sum()).collect();
        PositionDistribution::new(self.dim, self.rho, self.t, probs)
    }

    /// Moments of the (renormalized) position distribution without
    /// materializing it.
    pub fn spread(&self) -> Spread {
        let mut acc = Spread::accumulator(self.dim);
        self.for_each_site(|x, y, amps| acc.add(x, y, amps.iter().map(|a| a.norm_sqr()).sum()));
        acc.finish()
    }
}

fn coin_count(dim: usize) -> Result<usize> {
    match dim {
        1 => Ok(2),
        2 => Ok(4),
        _ => Err(Error::Config(format!("lattice dimension must be 1 or 2, got {dim}"))),
    }
}

/// Source of jump lengths for an evolution.
#[derive(Debug)]
pub enum Jumps<'a> {
    Clean,
    Dynamic(&'a JumpSequence),
    /// Grown lazily to cover the walker before every step.
    Static(&'a mut JumpField),
}

/// Per-step record of an evolution; index `t` runs over `0..=steps`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub sigma: Vec<f64>,
    /// Squared norm before renormalization.
    pub norm: Vec<f64>,
    pub snapshots: Vec<PositionDistribution>,
}

/// Runs `steps` steps, recording σ(t) and the raw norm at every `t` and the
/// full position distribution at each of `snapshot_times`.
pub fn evolve(
    state: &mut WalkerState,
    coin: &CoinOperator,
    mut jumps: Jumps<'_>,
    steps: usize,
    snapshot_times: &[usize],
) -> Result<Trajectory> {
    if let Jumps::Dynamic(seq) = &jumps {
        if seq.len() < steps {
            return Err(Error::Config(format!("jump sequence has {} steps, need {steps}", seq.len())));
        }
    }
    let mut traj = Trajectory::default();
    let record = |state: &WalkerState, traj: &mut Trajectory| {
        let spread = state.spread();
        traj.sigma.push(spread.sigma);
        traj.norm.push(spread.total);
        if snapshot_times.contains(&state.t()) {
            traj.snapshots.push(state.position_distribution());
        }
    };
    record(state, &mut traj);
    for s in 0..steps {
        match &mut jumps {
            Jumps::Clean => state.step(coin, 1),
            Jumps::Dynamic(seq) => state.step(coin, seq.values[s]),
            Jumps::Static(field) => {
                field.grow_to(state.rho())?;
                state.step_static(coin, field)?;
            }
        }
        record(state, &mut traj);
    }
    Ok(traj)
}
