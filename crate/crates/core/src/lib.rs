//! Two-dimensional coherent spectra of a control-driven three-level ladder,
//! computed with a response-function engine and a non-Hermitian-Hamiltonian
//! engine, plus a six-level vibrational model and the spectral tooling
//! shared by both.

pub mod error;
pub mod io;
pub mod lindblad;
pub mod model;
pub mod nhh;
pub mod popdyn;
pub mod rdc;
pub mod rf;
pub mod spectra;
pub mod twod;

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{EngineError, Error, ModelError, OracleError, SpectraError};
pub use num_complex::Complex64;
