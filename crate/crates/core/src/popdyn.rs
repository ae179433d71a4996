//! Waiting-time population dynamics and trace series for both engines.

use crate::error::EngineError;
use crate::lindblad::{ladder_trajectory, DensityMatrix, Dynamics, OpenSystem};
use crate::model::{derive_rates, Level, ThreeLevelModel};
use crate::nhh::{free_coeffs, quasi_green_rotating, QuasiGreenKind};
use crate::rf::{green_time, GreenKind};
use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

/// Sampled waiting-time kernels. Coherence kernels are purely imaginary and
/// stored by their imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTable {
    pub t2: Vec<f64>,
    pub rf_bbbb: Vec<f64>,
    pub rf_eeee: Vec<f64>,
    pub rf_bbee: Vec<f64>,
    pub rf_eebb: Vec<f64>,
    pub rf_ceee_im: Vec<f64>,
    pub rf_ceec: Vec<f64>,
    pub nhh_bbbb: Vec<f64>,
    pub nhh_eeee: Vec<f64>,
    pub nhh_ceee_im: Vec<f64>,
    pub nhh_eeec_im: Vec<f64>,
    pub nhh_ceec: Vec<f64>,
}

impl PopulationTable {
    /// Column names and values in output order.
    pub fn columns(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("t2_us", &self.t2),
            ("rf_bbbb", &self.rf_bbbb),
            ("rf_eeee", &self.rf_eeee),
            ("rf_bbee", &self.rf_bbee),
            ("rf_eebb", &self.rf_eebb),
            ("rf_ceee_im", &self.rf_ceee_im),
            ("rf_ceec", &self.rf_ceec),
            ("nhh_bbbb", &self.nhh_bbbb),
            ("nhh_eeee", &self.nhh_eeee),
            ("nhh_ceee_im", &self.nhh_ceee_im),
            ("nhh_eeec_im", &self.nhh_eeec_im),
            ("nhh_ceec", &self.nhh_ceec),
        ]
    }
}

/// Trace of the density matrix started in `|b⟩` or `|e⟩`: the master
/// equation keeps it at one, the non-Hermitian evolution loses it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub t2: Vec<f64>,
    pub lindblad_from_b: Vec<f64>,
    pub lindblad_from_e: Vec<f64>,
    pub nhh_from_b: Vec<f64>,
    pub nhh_from_e: Vec<f64>,
}

impl TraceSeries {
    pub fn columns(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("t2_us", &self.t2),
            ("lindblad_from_b", &self.lindblad_from_b),
            ("lindblad_from_e", &self.lindblad_from_e),
            ("nhh_from_b", &self.nhh_from_b),
            ("nhh_from_e", &self.nhh_from_e),
        ]
    }
}

fn ascending(t2: &[f64]) -> Result<(), EngineError> {
    if let Some(&t) = t2.first().filter(|&&t| t < 0.0) {
        return Err(EngineError::NegativeTime(t));
    }
    if t2.windows(2).any(|w| w[1] < w[0]) {
        return Err(EngineError::Unordered);
    }
    Ok(())
}

pub fn population_dynamics(model: &ThreeLevelModel, t2: &[f64]) -> Result<PopulationTable, EngineError> {
    ascending(t2)?;
    let r = derive_rates(model)?;
    let rf = |kind: GreenKind| -> Result<Vec<Complex>, EngineError> {
        t2.iter().map(|&t| green_time(kind, t, &r)).collect()
    };
    let nhh = |kind: QuasiGreenKind| -> Vec<Complex> { t2.iter().map(|&t| quasi_green_rotating(kind, t, &r)).collect() };
    let re = |v: Vec<Complex>| v.into_iter().map(|z| z.re).collect();
    let im = |v: Vec<Complex>| v.into_iter().map(|z| z.im).collect();
    Ok(PopulationTable {
        t2: t2.to_vec(),
        rf_bbbb: re(rf(GreenKind::BbbbT)?),
        rf_eeee: re(rf(GreenKind::EeeeT)?),
        rf_bbee: re(rf(GreenKind::BbeeT)?),
        rf_eebb: re(rf(GreenKind::EebbT)?),
        rf_ceee_im: im(rf(GreenKind::CeeeT)?),
        rf_ceec: re(rf(GreenKind::CeecT)?),
        nhh_bbbb: re(nhh(QuasiGreenKind::Bbbb)),
        nhh_eeee: re(nhh(QuasiGreenKind::Eeee)),
        nhh_ceee_im: im(nhh(QuasiGreenKind::Ceee)),
        nhh_eeec_im: im(nhh(QuasiGreenKind::Eeec)),
        nhh_ceec: re(nhh(QuasiGreenKind::Ceec)),
    })
}

/// Traces of both engines. The master-equation series is integrated with
/// the full generator at `step`; the non-Hermitian one is closed form.
pub fn trace_series(model: &ThreeLevelModel, t2: &[f64], step: Option<f64>) -> Result<TraceSeries, EngineError> {
    ascending(t2)?;
    let r = derive_rates(model)?;
    let step = step.unwrap_or_else(|| model.lindblad().default_step());
    let lindblad = |level: Level| -> Vec<f64> {
        ladder_trajectory(model, Dynamics::Lindblad, &DensityMatrix::basis(3, level.index()), t2, step)
            .iter()
            .map(|rho| rho.trace().re)
            .collect()
    };
    let from_b = t2.iter().map(|&t| free_coeffs(t, &r).bb.norm_sqr()).collect();
    let from_e = t2
        .iter()
        .map(|&t| {
            let c = free_coeffs(t, &r);
            c.ee.norm_sqr() + c.ce.norm_sqr()
        })
        .collect();
    Ok(TraceSeries {
        t2: t2.to_vec(),
        lindblad_from_b: lindblad(Level::B),
        lindblad_from_e: lindblad(Level::E),
        nhh_from_b: from_b,
        nhh_from_e: from_e,
    })
}

/// Uniform waiting-time grid `0, t_max/(count-1), …, t_max`.
pub fn uniform_times(t_max: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Positions of the first interior minimum and maximum of a sampled curve,
/// refined by a parabola through the three neighbouring samples.
pub fn first_extrema(t: &[f64], y: &[f64]) -> (Option<f64>, Option<f64>) {
    let refine = |k: usize| {
        let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        t[k] + shift * (t[k + 1] - t[k - 1]) / 2.0
    };
    let mut valley = None;
    let mut peak = None;
    for k in 1..y.len().saturating_sub(1) {
        if valley.is_none() && y[k] < y[k - 1] && y[k] <= y[k + 1] {
            valley = Some(refine(k));
        }
        if peak.is_none() && y[k] > y[k - 1] && y[k] >= y[k + 1] {
            peak = Some(refine(k));
        }
        if valley.is_some() && peak.is_some() {
            break;
        }
    }
    (valley, peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_starts_from_identity() {
        let m = ThreeLevelModel::propanediol();
        let tab = population_dynamics(&m, &uniform_times(2.0, 21)).unwrap();
        assert_eq!(tab.rf_bbbb[0], 1.0);
        assert_eq!(tab.nhh_bbbb[0], 1.0);
        assert_eq!(tab.rf_eeee[0], 1.0);
        assert_eq!(tab.nhh_ceec[0], 0.0);
        assert_eq!(tab.columns().len(), 12);
    }

    #[test]
    fn rejects_descending_times() {
        let m = ThreeLevelModel::propanediol();
        assert!(population_dynamics(&m, &[0.0, 1.0, 0.5]).is_err());
        assert!(population_dynamics(&m, &[-1.0]).is_err());
    }

    #[test]
    fn extrema_of_a_cosine() {
        let t = uniform_times(3.0, 301);
        let y: Vec<f64> = t.iter().map(|&t| (std::f64::consts::PI * t).cos()).collect();
        let (v, p) = first_extrema(&t, &y);
        assert!((v.unwrap() - 1.0).abs() < 1e-6);
        assert!((p.unwrap() - 2.0).abs() < 1e-6);
    }
}
