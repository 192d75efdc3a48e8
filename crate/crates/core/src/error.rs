use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kd must be finite and positive, got {0}")]
    InvalidSeparation(f64),

    #[error("detector angle must be finite and within [-pi/2, pi/2], got {0}")]
    InvalidAngle(f64),

    #[error("phase {target} is not reachable with kd = {kd} (|phase/kd| > 1)")]
    UnreachablePhase { target: f64, kd: f64 },

    #[error("field amplitude must be finite and positive, got {0}")]
    InvalidFieldAmplitude(f64),

    #[error("visibility must lie in [0, 1], got {0}")]
    InvalidVisibility(f64),

    #[error("efficiency must lie in (0, 1], got {0}")]
    InvalidEfficiency(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state has no nonzero amplitude")]
    ZeroState,

    #[error("invalid ket: {0}")]
    InvalidKet(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("tolerance must be finite and positive, got {0}")]
    InvalidTolerance(f64),

    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),

    #[error("trials_per_setting must be at least 1")]
    ZeroTrials,

    #[error("conditioning probability is zero")]
    ZeroMarginal,
}
