use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("levels must satisfy omega_e > omega_c > omega_b (got b={omega_b}, e={omega_e}, c={omega_c})")]
    LevelOrdering { omega_b: f64, omega_e: f64, omega_c: f64 },
    #[error("inconsistent dimensions: {levels} levels, dipole {dipole:?}, {decay} decay rates")]
    Dimension { levels: usize, dipole: (usize, usize), decay: usize },
    #[error("dipole matrix is not symmetric at ({i}, {j})")]
    AsymmetricDipole { i: usize, j: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("denominator of {kind} vanishes at {at}")]
    Singular { kind: &'static str, at: f64 },
    #[error("{kind} is a {expected}-domain kernel")]
    WrongDomain { kind: &'static str, expected: &'static str },
    #[error("unknown kernel label {0:?}")]
    UnknownKind(String),
    #[error("waiting time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("waiting times must be ascending")]
    Unordered,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial state is not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("step {step} too large: halving the step changes the result by {change:e} (tolerance {tolerance:e})")]
    StepTooLarge { step: f64, change: f64, tolerance: f64 },
    #[error("no steady state within horizon {horizon} (last rate of change {rate:e})")]
    NotConverged { horizon: f64, rate: f64 },
    #[error("{0} is only defined for the three-level model")]
    Unsupported(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("padding {pad} is smaller than the {len} input samples")]
    PadTooSmall { pad: usize, len: usize },
    #[error("spectrum is identically zero")]
    EmptySpectrum,
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("peak index {0} out of range")]
    PeakIndex(usize),
}

/// Any failure raised by the engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
