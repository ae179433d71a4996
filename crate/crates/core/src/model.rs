//! Model parameters for the driven three-level ladder and for generic
//! multi-level anharmonic systems.
//!
//! Three-level quantities use angular frequencies in rad/µs and times in µs.
//! Multi-level (vibrational) quantities use rad/ps and ps.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::ModelError;

/// Speed of light in cm/ps.
pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;

/// Converts a wavenumber in cm⁻¹ to an angular frequency in rad/ps.
pub fn wavenumber_to_angular(wavenumber: f64) -> f64 {
    TAU * SPEED_OF_LIGHT_CM_PER_PS * wavenumber
}

/// Converts an angular frequency in rad/ps to a wavenumber in cm⁻¹.
pub fn angular_to_wavenumber(omega: f64) -> f64 {
    omega / (TAU * SPEED_OF_LIGHT_CM_PER_PS)
}

/// Converts `f` given as an ordinary frequency in MHz into rad/µs.
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Level labels of the ladder: ground `B`, probe-coupled `E`, control-coupled `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    B,
    E,
    C,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::B, Level::E, Level::C];

    pub fn index(self) -> usize {
        match self {
            Level::B => 0,
            Level::E => 1,
            Level::C => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            Level::B => 'b',
            Level::E => 'e',
            Level::C => 'c',
        }
    }
}

/// Driven three-level ladder b–e–c. The control field couples e and c, the
/// probe pulses couple b and e. All rates in rad/µs, `dt_probe` in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelModel {
    pub omega_b: f64,
    pub omega_e: f64,
    pub omega_c: f64,
    /// Control Rabi frequency on e–c.
    pub rabi_ec: f64,
    /// Probe Rabi frequency on b–e during each pulse.
    pub rabi_be: f64,
    /// Population transfer e → b.
    pub gamma1: f64,
    /// Population transfer b → e.
    pub gamma2: f64,
    pub gamma0_b: f64,
    pub gamma0_e: f64,
    pub gamma0_c: f64,
    /// Duration of each of the three probe pulses.
    pub dt_probe: f64,
}

impl ThreeLevelModel {
    /// NMR parameters of 1,2-propanediol used throughout the examples.
    pub fn propanediol() -> Self {
        Self {
            omega_b: 0.0,
            omega_e: mhz(4.33e6),
            omega_c: mhz(4.32e6),
            rabi_ec: mhz(2.0),
            rabi_be: mhz(50.0),
            gamma1: mhz(0.001),
            gamma2: mhz(0.000_03),
            gamma0_b: mhz(0.1),
            gamma0_e: mhz(0.1),
            gamma0_c: mhz(0.1),
            dt_probe: 5e-4,
        }
    }

    /// Control-field frequency. The control is always resonant with e–c.
    pub fn nu_c(&self) -> f64 {
        self.omega_e - self.omega_c
    }

    pub fn omega_eb(&self) -> f64 {
        self.omega_e - self.omega_b
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = [
            ("rabi_ec", self.rabi_ec),
            ("rabi_be", self.rabi_be),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma0_b", self.gamma0_b),
            ("gamma0_e", self.gamma0_e),
            ("gamma0_c", self.gamma0_c),
            ("dt_probe", self.dt_probe),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::NegativeRate { name, value });
            }
        }
        if !(self.omega_e > self.omega_c && self.omega_c > self.omega_b) {
            return Err(ModelError::LevelOrdering {
                omega_b: self.omega_b,
                omega_e: self.omega_e,
                omega_c: self.omega_c,
            });
        }
        Ok(())
    }
}

impl Default for ThreeLevelModel {
    fn default() -> Self {
        Self::propanediol()
    }
}

/// Combined decay rates, dressed frequencies and pulse constants derived
/// from a [`ThreeLevelModel`]. The primary rates are carried along so the
/// engines need only this struct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    pub rabi_ec: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Decay of the b–e coherence.
    pub gamma_eb: f64,
    /// Decay of the e–c coherence.
    pub gamma_ec_plus: f64,
    /// Difference of e and c amplitude damping.
    pub gamma_ec_minus: f64,
    /// Decay of the b–c coherence.
    pub gamma_bc: f64,
    /// Population damping of b in the non-Hermitian picture.
    pub gamma_b: f64,
    /// `sqrt(Ω² − γ₊²/4)`, principal branch.
    pub omega_tilde_plus: Complex64,
    /// `sqrt(Ω² − γ₋²/4)`, principal branch.
    pub omega_tilde_minus: Complex64,
    pub a1: f64,
    pub a2: f64,
    /// Pulse area factor `iΩ_be δt / 2`, identical for the three pulses.
    pub beta: Complex64,
    /// Normalization `(1 + |β|²)^(-1/2)`.
    pub norm: f64,
}

pub fn derive_rates(model: &ThreeLevelModel) -> Result<DerivedRates, ModelError> {
    model.validate()?;
    let m = model;
    let gamma_eb = 0.5 * (m.gamma1 + m.gamma2 + m.gamma0_e + m.gamma0_b);
    let gamma_ec_plus = 0.5 * (m.gamma1 + m.gamma0_e + m.gamma0_c);
    let gamma_ec_minus = m.gamma1 + m.gamma0_e - m.gamma0_c;
    let gamma_bc = 0.5 * (m.gamma2 + m.gamma0_b + m.gamma0_c);
    let gamma_b = m.gamma2 + m.gamma0_b;
    let omega2 = m.rabi_ec * m.rabi_ec;
    let dressed = |g: f64| Complex64::new(omega2 - 0.25 * g * g, 0.0).sqrt();
    let total = m.gamma1 + m.gamma2;
    let a2 = total - gamma_ec_plus;
    let a1 = total * a2 + omega2;
    let beta = Complex64::new(0.0, 0.5 * m.rabi_be * m.dt_probe);
    let norm = (1.0 + beta.norm_sqr()).powf(-0.5);
    Ok(DerivedRates {
        rabi_ec: m.rabi_ec,
        gamma1: m.gamma1,
        gamma2: m.gamma2,
        gamma_eb,
        gamma_ec_plus,
        gamma_ec_minus,
        gamma_bc,
        gamma_b,
        omega_tilde_plus: dressed(gamma_ec_plus),
        omega_tilde_minus: dressed(gamma_ec_minus),
        a1,
        a2,
        beta,
        norm,
    })
}

/// N-level system with a dipole coupling matrix and per-level amplitude
/// decay. Energies in rad/ps, decay rates in rad/ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLevelModel {
    energies: Vec<f64>,
    dipole: Array2<f64>,
    decay: Vec<f64>,
}

impl MultiLevelModel {
    pub fn new(energies: Vec<f64>, dipole: Array2<f64>, decay: Vec<f64>) -> Result<Self, ModelError> {
        let n = energies.len();
        if dipole.dim() != (n, n) || decay.len() != n {
            return Err(ModelError::Dimension {
                levels: n,
                dipole: dipole.dim(),
                decay: decay.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if (dipole[(i, j)] - dipole[(j, i)]).abs() > 1e-12 {
                    return Err(ModelError::AsymmetricDipole { i, j });
                }
            }
        }
        if let Some(&value) = decay.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(ModelError::NegativeRate { name: "decay", value });
        }
        Ok(Self { energies, dipole, decay })
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dipole(&self) -> &Array2<f64> {
        &self.dipole
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    pub fn with_dipole(&self, dipole: Array2<f64>) -> Result<Self, ModelError> {
        Self::new(self.energies.clone(), dipole, self.decay.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propanediol_rates() {
        let r = derive_rates(&ThreeLevelModel::propanediol()).unwrap();
        assert!((r.gamma_ec_plus / TAU - 0.1005).abs() < 1e-12);
        assert!((r.gamma_b / TAU - 0.10003).abs() < 1e-12);
        assert!((r.omega_tilde_plus.re / TAU - 1.999_368_634_719).abs() < 1e-9);
        assert_eq!(r.omega_tilde_plus.im, 0.0);
        assert!((r.norm - 0.996_93).abs() < 1e-5);
    }

    #[test]
    fn overdamped_dressing_is_imaginary() {
        let mut m = ThreeLevelModel::propanediol();
        m.rabi_ec = 0.01;
        let r = derive_rates(&m).unwrap();
        assert_eq!(r.omega_tilde_plus.re, 0.0);
        assert!(r.omega_tilde_plus.im > 0.0);
    }

    #[test]
    fn rejects_negative_rate() {
        let mut m = ThreeLevelModel::propanediol();
        m.gamma1 = -1.0;
        assert!(matches!(derive_rates(&m), Err(ModelError::NegativeRate { name: "gamma1", .. })));
    }

    #[test]
    fn rejects_bad_ordering() {
        let mut m = ThreeLevelModel::propanediol();
        m.omega_c = m.omega_e + 1.0;
        assert!(matches!(m.validate(), Err(ModelError::LevelOrdering { .. })));
    }

    #[test]
    fn wavenumber_conversion() {
        assert!((wavenumber_to_angular(1.0) - 0.188_365_157).abs() < 1e-8);
        assert!((angular_to_wavenumber(wavenumber_to_angular(2036.0)) - 2036.0).abs() < 1e-10);
    }
}
