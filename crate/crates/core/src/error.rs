use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall in two families: validation failures (bad geometry, bad
/// configuration, contract violations) and numerical failures (pole
/// proximity, missing roots, ill-conditioned matrices). The CLI maps them to
/// distinct exit codes through [`Error::is_validation`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid billiard: {0}")]
    InvalidBilliard(String),

    #[error("invalid scatterer set: {0}")]
    InvalidScatterers(String),

    #[error("invalid accuracy settings: {0}")]
    InvalidAccuracy(String),

    #[error("invalid energy window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{count} modes below e_cut={e_cut} exceed the budget of {budget}")]
    MemoryBudget { e_cut: f64, count: usize, budget: usize },

    #[error("e_cut={e_cut} is not above the ground state energy {ground}")]
    CutoffTooLow { e_cut: f64, ground: f64 },

    #[error("omega={omega} lies within {distance:e} of the unperturbed level e_{index}={pole}")]
    PoleProximity {
        omega: f64,
        pole: f64,
        index: usize,
        distance: f64,
    },

    #[error("theta=0 is the empty-billiard limit (infinite inverse coupling)")]
    EmptyBilliardLimit,

    #[error("ill-conditioned extension: {0}")]
    IllConditioned(String),

    #[error("root search failed in ({lo}, {hi}): {reason}")]
    MissingRoot { lo: f64, hi: f64, reason: String },

    #[error("eigenvalue curve tracking failed in ({lo}, {hi}) after refinement")]
    CurveTracking { lo: f64, hi: f64 },

    #[error("secular equation bracket violated at step {step}: {reason}")]
    BracketViolation { step: usize, reason: String },

    #[error("insufficient sample: need at least {needed}, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("spacing argument must be non-negative, got {0}")]
    NegativeSpacing(f64),

    #[error("configuration rejected:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidBilliard(_)
                | Error::InvalidScatterers(_)
                | Error::InvalidAccuracy(_)
                | Error::InvalidWindow { .. }
                | Error::Contract(_)
                | Error::MemoryBudget { .. }
                | Error::CutoffTooLow { .. }
                | Error::EmptyBilliardLimit
                | Error::InsufficientSample { .. }
                | Error::NegativeSpacing(_)
                | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
