//! Response-function (Liouville space) engine: closed-form Green functions
//! of the driven ladder and the rephasing signal built from them.
//!
//! Frequency-domain kernels are one-sided Fourier transforms of the
//! optical coherences in the frame rotating at `omega_eb`; time-domain
//! kernels are the waiting-time propagators of populations and of the e–c
//! coherence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::DerivedRates;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Liouville-space Green function kinds, named final-then-initial element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GreenKind {
    /// `|b⟩⟨e| → |b⟩⟨e|` during the first delay.
    BebeW,
    /// `|e⟩⟨b| → |e⟩⟨b|` during the detection delay.
    EbebW,
    /// `|b⟩⟨e| → |b⟩⟨c|` during the first delay.
    BcbeW,
    /// `|c⟩⟨b| → |e⟩⟨b|` during the detection delay.
    EbcbW,
    EeeeT,
    BbeeT,
    EebbT,
    BbbbT,
    CeeeT,
    EeecT,
    CeecT,
}

impl GreenKind {
    pub const ALL: [GreenKind; 11] = [
        GreenKind::BebeW,
        GreenKind::EbebW,
        GreenKind::BcbeW,
        GreenKind::EbcbW,
        GreenKind::EeeeT,
        GreenKind::BbeeT,
        GreenKind::EebbT,
        GreenKind::BbbbT,
        GreenKind::CeeeT,
        GreenKind::EeecT,
        GreenKind::CeecT,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GreenKind::BebeW => "bebe_w",
            GreenKind::EbebW => "ebeb_w",
            GreenKind::BcbeW => "bcbe_w",
            GreenKind::EbcbW => "ebcb_w",
            GreenKind::EeeeT => "eeee_t",
            GreenKind::BbeeT => "bbee_t",
            GreenKind::EebbT => "eebb_t",
            GreenKind::BbbbT => "bbbb_t",
            GreenKind::CeeeT => "ceee_t",
            GreenKind::EeecT => "eeec_t",
            GreenKind::CeecT => "ceec_t",
        }
    }

    pub fn from_label(label: &str) -> Result<Self, EngineError> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == label)
            .ok_or_else(|| EngineError::UnknownKind(label.to_string()))
    }

    pub fn is_frequency(self) -> bool {
        matches!(self, GreenKind::BebeW | GreenKind::EbebW | GreenKind::BcbeW | GreenKind::EbcbW)
    }
}

fn nonzero(kind: GreenKind, at: f64, d: Complex64) -> Result<Complex64, EngineError> {
    if d.norm() == 0.0 {
        Err(EngineError::Singular { kind: kind.label(), at })
    } else {
        Ok(d)
    }
}

/// Frequency-domain Green function at probe frequency `omega` (absolute,
/// rad/µs). `omega_eb` is the b–e transition frequency of the rotating frame.
pub fn green_freq(kind: GreenKind, omega: f64, rates: &DerivedRates, omega_eb: f64) -> Result<Complex64, EngineError> {
    green_freq_detuned(kind, omega - omega_eb, rates)
}

/// Same as [`green_freq`] with the detuning `x = ω − ω_eb` given directly.
pub fn green_freq_detuned(kind: GreenKind, x: f64, rates: &DerivedRates) -> Result<Complex64, EngineError> {
    let omega2 = rates.rabi_ec * rates.rabi_ec;
    let x = Complex64::new(x, 0.0);
    let g_bc = I * rates.gamma_bc;
    let g_eb = I * rates.gamma_eb;
    match kind {
        GreenKind::BebeW => {
            let d = nonzero(kind, x.re, 4.0 * (x - g_bc) * (x - g_eb) - omega2)?;
            Ok(4.0 * (x - g_bc) / d)
        }
        GreenKind::EbebW => {
            let d = nonzero(kind, x.re, 4.0 * (x + g_bc) * (x + g_eb) - omega2)?;
            Ok(4.0 * (x + g_bc) / d)
        }
        GreenKind::BcbeW => {
            let d = nonzero(kind, x.re, 4.0 * (x - g_bc) * (-x + g_eb) + omega2)?;
            Ok(2.0 * rates.rabi_ec / d)
        }
        GreenKind::EbcbW => {
            let d = nonzero(kind, x.re, 4.0 * (x + g_bc) * (-x - g_eb) + omega2)?;
            Ok(2.0 * rates.rabi_ec / d)
        }
        _ => Err(EngineError::WrongDomain { kind: kind.label(), expected: "time" }),
    }
}

/// `sin(w t) / w`, continuous through `w = 0`.
pub(crate) fn sin_over(w: Complex64, t: f64) -> Complex64 {
    let wt = w * t;
    if wt.norm() < 1e-4 {
        t * (1.0 - wt * wt / 6.0)
    } else {
        (wt).sin() / w
    }
}

/// `(1 − e^{−g t}) / g`, continuous through `g = 0`.
fn relaxed(g: f64, t: f64) -> f64 {
    if (g * t).abs() < 1e-12 {
        t
    } else {
        -(-g * t).exp_m1() / g
    }
}

/// Waiting-time Green function at `t2 ≥ 0` (µs).
pub fn green_time(kind: GreenKind, t2: f64, rates: &DerivedRates) -> Result<Complex64, EngineError> {
    if t2 < 0.0 {
        return Err(EngineError::NegativeTime(t2));
    }
    let r = rates;
    let omega2 = r.rabi_ec * r.rabi_ec;
    let gamma = r.gamma1 + r.gamma2;
    let gp = r.gamma_ec_plus;
    let w = r.omega_tilde_plus;
    let damp = (-0.5 * gp * t2).exp();
    let sin = sin_over(w, t2);
    let cos = (w * t2).cos();
    let relax = (-gamma * t2).exp();
    let population = |kind| {
        if r.a1 == 0.0 {
            Err(EngineError::Singular { kind: GreenKind::label(kind), at: t2 })
        } else {
            Ok(r.a1)
        }
    };
    let value = match kind {
        GreenKind::EeeeT => {
            let a1 = population(kind)?;
            let osc = damp
                * ((r.a2 * r.gamma2 * gp + omega2 * (gp - 2.0 * r.gamma1)) / (4.0 * a1) * sin
                    + (r.a2 * r.gamma2 + omega2) / (2.0 * a1) * cos);
            osc + 0.5 - 0.5 * r.gamma1 * relaxed(gamma, t2) + r.gamma1 * relax * r.a2 / (2.0 * a1)
        }
        GreenKind::BbeeT => {
            let a1 = population(kind)?;
            let osc = damp * r.gamma1 * ((r.a2 * gp + 2.0 * omega2) / (4.0 * a1) * sin + r.a2 / (2.0 * a1) * cos);
            osc + 0.5 * r.gamma1 * relaxed(gamma, t2) - r.gamma1 * relax * r.a2 / (2.0 * a1)
        }
        GreenKind::EebbT => Complex64::new(r.gamma2 * relaxed(gamma, t2), 0.0),
        GreenKind::BbbbT => Complex64::new(1.0 - r.gamma2 * relaxed(gamma, t2), 0.0),
        GreenKind::CeeeT => 0.5 * I * r.rabi_ec * sin * damp,
        GreenKind::EeecT => -0.5 * I * r.rabi_ec * sin * damp,
        GreenKind::CeecT => damp * (0.25 * gp * sin - 0.5 * cos) + 0.5 * (-gp * t2).exp(),
        _ => return Err(EngineError::WrongDomain { kind: kind.label(), expected: "frequency" }),
    };
    // Kernels that are real by construction drop round-off imaginary parts
    // left over from the complex dressed frequency.
    Ok(match kind {
        GreenKind::CeeeT | GreenKind::EeecT => Complex64::new(0.0, value.im),
        _ => Complex64::new(value.re, 0.0),
    })
}

/// Rephasing signal of the response-function engine: the four Liouville
/// paths (excited-state evolution, e→b transfer, b→e transfer, ground-state
/// bleach), each retrievable for path-split plots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfSignal {
    pub terms: [Complex64; 4],
}

impl RfSignal {
    pub fn total(&self) -> Complex64 {
        self.terms.iter().sum()
    }
}

/// Rephasing signal at detection detuning `x3`, waiting time `t2` and
/// excitation detuning `x1` (detunings from `omega_eb`).
pub fn rp_signal_rf_detuned(x3: f64, t2: f64, x1: f64, rates: &DerivedRates) -> Result<RfSignal, EngineError> {
    let g = |k| green_time(k, t2, rates);
    let bebe = green_freq_detuned(GreenKind::BebeW, x1, rates)?;
    let ebeb = green_freq_detuned(GreenKind::EbebW, x3, rates)?;
    Ok(RfSignal {
        terms: [
            ebeb * g(GreenKind::EeeeT)? * bebe,
            ebeb * g(GreenKind::BbeeT)? * bebe,
            ebeb * g(GreenKind::EebbT)? * bebe,
            ebeb * g(GreenKind::BbbbT)? * bebe,
        ],
    })
}

/// Absolute-frequency form of [`rp_signal_rf_detuned`].
pub fn rp_signal_rf(omega3: f64, t2: f64, omega1: f64, rates: &DerivedRates, omega_eb: f64) -> Result<RfSignal, EngineError> {
    rp_signal_rf_detuned(omega3 - omega_eb, t2, omega1 - omega_eb, rates)
}

/// Response-function kernels arranged along the five non-Hermitian paths:
/// ground-state bleach, excited-state evolution, e→c transfer during the
/// waiting time, c→e transfer, and the e–c coherence path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfPathSignal {
    pub terms: [Complex64; 5],
}

impl RfPathSignal {
    pub fn total(&self) -> Complex64 {
        self.terms.iter().sum()
    }
}

pub fn rp_signal_rf_nhh_paths_detuned(
    x3: f64,
    t2: f64,
    x1: f64,
    rates: &DerivedRates,
) -> Result<RfPathSignal, EngineError> {
    let g = |k| green_time(k, t2, rates);
    let bebe = green_freq_detuned(GreenKind::BebeW, x1, rates)?;
    let ebeb = green_freq_detuned(GreenKind::EbebW, x3, rates)?;
    let bcbe = green_freq_detuned(GreenKind::BcbeW, x1, rates)?;
    let ebcb = green_freq_detuned(GreenKind::EbcbW, x3, rates)?;
    Ok(RfPathSignal {
        terms: [
            ebeb * g(GreenKind::BbbbT)? * bebe,
            ebeb * g(GreenKind::EeeeT)? * bebe,
            ebcb * g(GreenKind::CeeeT)? * bebe,
            ebeb * g(GreenKind::EeecT)? * bcbe,
            ebcb * g(GreenKind::CeecT)? * bcbe,
        ],
    })
}

pub fn rp_signal_rf_nhh_paths(
    omega3: f64,
    t2: f64,
    omega1: f64,
    rates: &DerivedRates,
    omega_eb: f64,
) -> Result<RfPathSignal, EngineError> {
    rp_signal_rf_nhh_paths_detuned(omega3 - omega_eb, t2, omega1 - omega_eb, rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_rates, ThreeLevelModel};

    fn rates() -> DerivedRates {
        derive_rates(&ThreeLevelModel::propanediol()).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for k in GreenKind::ALL {
            assert_eq!(GreenKind::from_label(k.label()).unwrap(), k);
        }
        assert!(matches!(GreenKind::from_label("xxxx_t"), Err(EngineError::UnknownKind(_))));
    }

    #[test]
    fn initial_values() {
        let r = rates();
        let at0 = |k| green_time(k, 0.0, &r).unwrap();
        assert!((at0(GreenKind::BbbbT) - 1.0).norm() < 1e-15);
        assert!(at0(GreenKind::EebbT).norm() < 1e-15);
        assert!((at0(GreenKind::EeeeT) - 1.0).norm() < 1e-12);
        assert!(at0(GreenKind::BbeeT).norm() < 1e-12);
        assert!(at0(GreenKind::CeeeT).norm() < 1e-15);
        assert!(at0(GreenKind::CeecT).norm() < 1e-12);
    }

    #[test]
    fn frequency_kernel_rejects_time_kind() {
        let r = rates();
        assert!(matches!(green_freq_detuned(GreenKind::EeeeT, 0.0, &r), Err(EngineError::WrongDomain { .. })));
        assert!(matches!(green_time(GreenKind::BebeW, 0.0, &r), Err(EngineError::WrongDomain { .. })));
        assert!(matches!(green_time(GreenKind::EeeeT, -1.0, &r), Err(EngineError::NegativeTime(_))));
    }

    #[test]
    fn singular_denominator_is_reported() {
        let mut m = ThreeLevelModel::propanediol();
        m.gamma0_b = 0.0;
        m.gamma0_e = 0.0;
        m.gamma0_c = 0.0;
        m.gamma1 = 0.0;
        m.gamma2 = 0.0;
        let r = derive_rates(&m).unwrap();
        let x = 0.5 * m.rabi_ec;
        assert!(matches!(green_freq_detuned(GreenKind::BebeW, x, &r), Err(EngineError::Singular { .. })));
    }

    #[test]
    fn series_branch_is_continuous() {
        let w = Complex64::new(1e-7, 0.0);
        assert!((sin_over(w, 2.0) - 2.0).norm() < 1e-12);
        let w = Complex64::new(2e-4, 0.0);
        let direct = (w * 1.0).sin() / w;
        assert!((sin_over(w, 1.0) - direct).norm() < 1e-15);
    }
}
