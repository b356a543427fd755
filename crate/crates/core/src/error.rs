use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coin matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitaryCoin { deviation: f64 },

    #[error("coin has dimension {got}, expected {expected}")]
    CoinDimension { expected: usize, got: usize },

    #[error("initial coin vector is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid disorder parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot parse disorder spec `{0}`")]
    ParseDisorder(String),

    #[error("jump field radius {have} does not cover required reach {need}")]
    FieldTooSmall { have: usize, need: usize },

    #[error("moment order must be 1 or 2, got {0}")]
    MomentOrder(u32),

    #[error("fit window [{t_min}, {t_max}] holds {points} points, need at least 3")]
    DegenerateWindow { t_min: usize, t_max: usize, points: usize },

    #[error("non-positive sigma {sigma} at t = {t}")]
    NonPositiveSigma { t: usize, sigma: f64 },

    #[error("{0}")]
    Config(String),
}
