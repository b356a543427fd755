//! Discrete-time coined quantum walks on the line and the square lattice
//! with random jump-length disorder.
//!
//! The walker alternates a coin unitary with a coin-conditioned shift whose
//! length is drawn from a discrete distribution: once per time step
//! (dynamic disorder) or once per vertex (static disorder). Spreading is
//! measured by σ(t), averaged over disorder realizations, and summarized by
//! the exponent α of `⟨σ(t)⟩ ∼ t^α`. A classical random walk with the same
//! jump statistics serves as the diffusive baseline.

pub mod classical;
pub mod coin;
pub mod disorder;
pub mod ensemble;
pub mod error;
pub mod rng;
pub mod stats;
pub mod walk;

pub use coin::{CoinKind, CoinOperator};
pub use disorder::{DisorderSpec, Distribution, DistributionMoments, JumpField, JumpSequence};
pub use ensemble::{ensemble_average, DisorderMode, EnsembleResult, Protocol, QuantumWalk, Walker};
pub use error::{Error, Result};
pub use stats::{fit_exponent, PositionDistribution, ScalingFit, Spread};
pub use walk::{evolve, Jumps, Trajectory, WalkerState};
