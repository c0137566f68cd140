use alloc::string::String;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spin: 2s = {twice} (must be a positive integer)")]
    InvalidSpin { twice: i32 },

    #[error("cannot parse half-integer from {0:?}")]
    ParseHalfInteger(String),

    #[error("projection m = {twice_m}/2 out of range for s = {twice_s}/2")]
    ProjectionOutOfRange { twice_s: i32, twice_m: i32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular matching system ({context})")]
    SingularSystem { context: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("post-selected branch has vanishing probability {probability:e}")]
    VanishingProbability { probability: f64 },

    #[error("invariant violated: {what} deviates by {deviation:e} (tolerance {tolerance:e})")]
    InvariantViolation {
        what: &'static str,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
