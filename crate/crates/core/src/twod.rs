//! Rephasing 2D spectra of the three-level ladder, evaluated directly from
//! the closed-form frequency kernels on a detuning grid.

use crate::error::EngineError;
use crate::model::{derive_rates, ThreeLevelModel};
use crate::nhh::{rp_signal_nhh_detuned, EMISSION_PHASE};
use crate::rf::{rp_signal_rf_detuned, rp_signal_rf_nhh_paths_detuned};
use crate::spectra::{evaluate_grid, Axis, SpectrumResult};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Response functions along their own four paths.
    Rf,
    /// Non-Hermitian engine, five paths.
    Nhh,
    /// Response functions along the non-Hermitian paths.
    RfNhhPaths,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rf, Method::Nhh, Method::RfNhhPaths];

    pub fn label(self) -> &'static str {
        match self {
            Method::Rf => "rf2d",
            Method::Nhh => "nhh2d",
            Method::RfNhhPaths => "rf-nhhpaths-2d",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == s)
    }

    /// Names of the individually retrievable terms.
    pub fn term_labels(self) -> &'static [&'static str] {
        match self {
            Method::Rf => &["eeee", "bbee", "eebb", "bbbb"],
            Method::Nhh | Method::RfNhhPaths => &["bbbb", "eeee", "ceee", "eeec", "ceec"],
        }
    }

    /// Terms at one point, already multiplied into the displayed quantity:
    /// the response-function signal as is, the non-Hermitian polarization
    /// times the emission phase. The spectrum shown is the real part.
    pub fn terms(self, x3: f64, t2: f64, x1: f64, rates: &crate::model::DerivedRates) -> Result<Vec<Complex64>, EngineError> {
        Ok(match self {
            Method::Rf => rp_signal_rf_detuned(x3, t2, x1, rates)?.terms.to_vec(),
            Method::Nhh => rp_signal_nhh_detuned(x3, t2, x1, rates)?.terms.iter().map(|z| EMISSION_PHASE * z).collect(),
            Method::RfNhhPaths => rp_signal_rf_nhh_paths_detuned(x3, t2, x1, rates)?.terms.to_vec(),
        })
    }
}

/// Detuning grid `±half_width` around the e–b resonance, shared by ω₁ and ω₃.
pub fn detuning_axis(half_width: f64, count: usize) -> Result<Axis, crate::error::SpectraError> {
    Axis::centered(0.0, half_width, count, "rad/us")
}

fn wrap(model: &ThreeLevelModel, method: Method, t2: f64, grid: crate::spectra::ComplexGrid2D, part: &str) -> SpectrumResult {
    SpectrumResult::new(grid, model.omega_eb(), method.label(), Some(t2))
        .with_metadata("part", part)
        .with_metadata("display", "real part")
        .with_metadata("axes", "detuning from omega_e - omega_b")
}

/// Un-normalized spectrum (sum of all terms) at waiting time `t2`.
pub fn three_level_spectrum(model: &ThreeLevelModel, method: Method, t2: f64, axis: &Axis) -> Result<SpectrumResult, EngineError> {
    if t2 < 0.0 {
        return Err(EngineError::NegativeTime(t2));
    }
    let r = derive_rates(model)?;
    let grid = evaluate_grid(axis, axis, |x1, x3| Ok::<_, EngineError>(method.terms(x3, t2, x1, &r)?.iter().sum()))?;
    Ok(wrap(model, method, t2, grid, "total"))
}

/// One spectrum per term, labelled by [`Method::term_labels`].
pub fn three_level_terms(
    model: &ThreeLevelModel,
    method: Method,
    t2: f64,
    axis: &Axis,
) -> Result<Vec<(&'static str, SpectrumResult)>, EngineError> {
    if t2 < 0.0 {
        return Err(EngineError::NegativeTime(t2));
    }
    let r = derive_rates(model)?;
    method
        .term_labels()
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            let grid = evaluate_grid(axis, axis, |x1, x3| Ok::<_, EngineError>(method.terms(x3, t2, x1, &r)?[k]))?;
            Ok((label, wrap(model, method, t2, grid, label)))
        })
        .collect()
}
