//! Error type shared by all physics modules.

use crate::dispersion::ModeId;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by the physics modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("no dispersion curve registered for mode {0}")]
    UnknownMode(ModeId),

    #[error(
        "wavelength {wavelength_nm} nm outside the validity interval \
         [{min_nm}, {max_nm}] nm of mode {mode}"
    )]
    WavelengthOutOfRange {
        mode: ModeId,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("effective index {value} ≤ 1 at {wavelength_nm} nm for mode {mode}")]
    NonPhysicalIndex {
        mode: ModeId,
        wavelength_nm: f64,
        value: f64,
    },

    #[error("phase mismatch does not change sign over [{lo_nm}, {hi_nm}] nm")]
    NoRootInBracket { lo_nm: f64, hi_nm: f64 },

    #[error("phase mismatch vanishes identically over the bracket; no isolated root")]
    DegenerateMismatch,

    #[error("multiple phase-matching roots in bracket: {roots_nm:?} nm")]
    MultipleRoots { roots_nm: Vec<f64> },

    #[error("pump placement constraints admit no feasible detuning: {0}")]
    InfeasibleConstraints(String),

    #[error("non-finite field state at z = {z_cm} cm (step {step}); reduce the step size")]
    NonFiniteState { z_cm: f64, step: usize },

    #[error("expected ~{expected:.3e} simulated events, above the cap of {cap:.3e}")]
    EventCapExceeded { expected: f64, cap: f64 },

    #[error("histogram spans only {available} accidental windows outside the peak; need {required}")]
    InsufficientSpan { available: usize, required: usize },

    #[error("no coincidences recorded in the peak window")]
    NoCoincidences,

    #[error("power-scaling design matrix is rank deficient; need ≥ 3 distinct powers")]
    RankDeficientFit,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
