//! Six-level carbonyl-stretch model (ground, two fundamentals, three
//! two-quantum states) and its impulsive third-order 2D spectrum.

use crate::error::{Error, ModelError};
use crate::model::{angular_to_wavenumber, wavenumber_to_angular, MultiLevelModel};
use crate::nhh::{PhaseSignature, EMISSION_PHASE};
use crate::spectra::{double_fft, Axis, ComplexGrid2D, Peak, SpectrumResult};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const LABELS: [&str; 6] = ["00", "a", "s", "2a", "2s", "as"];
/// Level energies in cm⁻¹.
pub const LEVEL_WAVENUMBERS: [f64; 6] = [0.0, 2015.0, 2084.0, 4016.0, 4157.0, 4073.0];
pub const QUANTA: [u8; 6] = [0, 1, 1, 2, 2, 2];
pub const GROUND: usize = 0;
pub const A: usize = 1;
pub const S: usize = 2;
pub const AA: usize = 3;
pub const SS: usize = 4;
pub const AS: usize = 5;

/// Transition dipoles relative to the symmetric fundamental.
pub const DIPOLES: [(usize, usize, f64); 8] = [
    (A, GROUND, 1.05),
    (S, GROUND, 1.0),
    (AS, S, 1.05),
    (AS, A, 1.0),
    (AA, A, 1.48),
    (SS, S, 1.41),
    (SS, A, 0.13),
    (AA, S, 0.13),
];

pub const DEFAULT_GAMMA_CM: f64 = 0.3;
/// Mean of the two fundamentals.
pub const DEFAULT_CARRIER_CM: f64 = 2036.0;

/// Multi-level model whose levels carry a vibrational quantum number, so a
/// rotating frame can remove one carrier per quantum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdcSystem {
    pub model: MultiLevelModel,
    pub quanta: Vec<u8>,
    pub labels: Vec<String>,
}

impl RdcSystem {
    pub fn new(model: MultiLevelModel, quanta: Vec<u8>, labels: Vec<String>) -> Result<Self, ModelError> {
        let n = model.n_levels();
        if quanta.len() != n || labels.len() != n {
            return Err(ModelError::Dimension { levels: n, dipole: model.dipole().dim(), decay: quanta.len() });
        }
        Ok(Self { model, quanta, labels })
    }

    pub fn n_levels(&self) -> usize {
        self.model.n_levels()
    }

    pub fn wavenumber(&self, level: usize) -> f64 {
        angular_to_wavenumber(self.model.energies()[level])
    }

    /// Energies with `quanta · carrier` removed (rad/ps).
    pub fn rotating_energies(&self, carrier: f64) -> Vec<f64> {
        self.model.energies().iter().zip(&self.quanta).map(|(e, &q)| e - q as f64 * carrier).collect()
    }

    /// Moves every level by `shift` per quantum (rad/ps).
    pub fn shifted(&self, shift: f64) -> Result<Self, ModelError> {
        let energies = self.model.energies().iter().zip(&self.quanta).map(|(e, &q)| e + q as f64 * shift).collect();
        let model = MultiLevelModel::new(energies, self.model.dipole().clone(), self.model.decay().to_vec())?;
        Self::new(model, self.quanta.clone(), self.labels.clone())
    }

    /// Same system with every transition between one- and two-quantum
    /// states removed.
    pub fn without_two_quantum(&self) -> Result<Self, ModelError> {
        let mut d = self.model.dipole().clone();
        for i in 0..self.n_levels() {
            for j in 0..self.n_levels() {
                if self.quanta[i] + self.quanta[j] == 3 {
                    d[(i, j)] = 0.0;
                }
            }
        }
        Self::new(self.model.with_dipole(d)?, self.quanta.clone(), self.labels.clone())
    }

    fn coupled(&self, from: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let d = self.model.dipole();
        (0..self.n_levels()).filter_map(move |to| {
            let mu = d[(to, from)];
            (mu != 0.0 && self.quanta[to].abs_diff(self.quanta[from]) == 1).then_some((to, mu))
        })
    }
}

/// The six-level system with coherence decay `gamma_cm` (cm⁻¹). The ground
/// state does not decay; every excited amplitude decays at the full rate so
/// that each coherence with the ground state dephases at `gamma_cm`.
pub fn build_rdc_with(gamma_cm: f64) -> Result<RdcSystem, ModelError> {
    if !(gamma_cm >= 0.0 && gamma_cm.is_finite()) {
        return Err(ModelError::NegativeRate { name: "gamma", value: gamma_cm });
    }
    let energies = LEVEL_WAVENUMBERS.iter().map(|&w| wavenumber_to_angular(w)).collect();
    let mut dipole = Array2::zeros((6, 6));
    for (i, j, mu) in DIPOLES {
        dipole[(i, j)] = mu;
        dipole[(j, i)] = mu;
    }
    let kappa = wavenumber_to_angular(gamma_cm);
    let decay = QUANTA.iter().map(|&q| if q == 0 { 0.0 } else { kappa }).collect();
    RdcSystem::new(
        MultiLevelModel::new(energies, dipole, decay)?,
        QUANTA.to_vec(),
        LABELS.iter().map(|s| s.to_string()).collect(),
    )
}

pub fn build_rdc() -> RdcSystem {
    build_rdc_with(DEFAULT_GAMMA_CM).expect("built-in parameters are valid")
}

pub const NON_REPHASING: PhaseSignature = PhaseSignature([1, -1, 1]);

#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    level: usize,
    signature: [i8; 3],
    amplitude: Complex64,
}

fn merge(branches: Vec<Branch>) -> Vec<Branch> {
    let mut map: BTreeMap<(usize, [i8; 3]), Complex64> = BTreeMap::new();
    for b in branches {
        *map.entry((b.level, b.signature)).or_default() += b.amplitude;
    }
    map.into_iter().map(|((level, signature), amplitude)| Branch { level, signature, amplitude }).collect()
}

/// One impulsive pulse in first order: each amplitude either passes
/// untouched or makes one dipole transition, picking up `iμ` and a phase
/// tag of +1 (up) or −1 (down) for this pulse.
fn pulse(system: &RdcSystem, state: &[Branch], p: usize) -> Vec<Branch> {
    let mut out = Vec::with_capacity(3 * state.len());
    for b in state {
        out.push(*b);
        for (to, mu) in system.coupled(b.level) {
            let mut signature = b.signature;
            signature[p] += if system.quanta[to] > system.quanta[b.level] { 1 } else { -1 };
            out.push(Branch { level: to, signature, amplitude: I * mu * b.amplitude });
        }
    }
    merge(out)
}

fn evolve(state: &mut [Branch], energies: &[f64], decay: &[f64], t: f64) {
    for b in state {
        b.amplitude *= Complex64::new(-decay[b.level] * t, -energies[b.level] * t).exp();
    }
}

/// Third-order polarization by direct propagation of the phase-tagged
/// wavefunction in the frame rotating at `carrier` (rad/ps). Ket and bra
/// branches are paired when their tags differ by `select`.
pub fn third_order_signal(
    system: &RdcSystem,
    carrier: f64,
    select: PhaseSignature,
    t1: f64,
    t2: f64,
    t3: f64,
) -> Complex64 {
    let energies = system.rotating_energies(carrier);
    let decay = system.model.decay();
    let mut state = vec![Branch { level: GROUND, signature: [0; 3], amplitude: Complex64::new(1.0, 0.0) }];
    for (p, t) in [t1, t2, t3].into_iter().enumerate() {
        state = pulse(system, &state, p);
        evolve(&mut state, &energies, decay, t);
    }
    let d = system.model.dipole();
    let mut total = Complex64::default();
    for k in &state {
        for b in &state {
            let net = [0, 1, 2].map(|p| k.signature[p] - b.signature[p]);
            if net == select.0 {
                total += b.amplitude.conj() * d[(b.level, k.level)] * k.amplitude;
            }
        }
    }
    total
}

/// A third-order path: the (ket, bra) element occupied during each delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdcPath {
    pub elements: [(usize, usize); 3],
    pub weight: Complex64,
}

impl RdcPath {
    fn factor(&self, interval: usize, t: f64, energies: &[f64], decay: &[f64]) -> Complex64 {
        let (k, b) = self.elements[interval];
        Complex64::new(-(decay[k] + decay[b]) * t, -(energies[k] - energies[b]) * t).exp()
    }

    pub fn evaluate(&self, t1: f64, t2: f64, t3: f64, energies: &[f64], decay: &[f64]) -> Complex64 {
        self.weight
            * self.factor(0, t1, energies, decay)
            * self.factor(1, t2, energies, decay)
            * self.factor(2, t3, energies, decay)
    }
}

#[derive(Debug, Clone)]
struct History {
    levels: [usize; 3],
    signature: [i8; 3],
    amplitude: Complex64,
}

fn histories(system: &RdcSystem) -> Vec<History> {
    let mut out = vec![History { levels: [GROUND; 3], signature: [0; 3], amplitude: Complex64::new(1.0, 0.0) }];
    for p in 0..3 {
        let mut next = Vec::new();
        for h in &out {
            let from = if p == 0 { GROUND } else { h.levels[p - 1] };
            let mut stay = h.clone();
            stay.levels[p] = from;
            next.push(stay);
            for (to, mu) in system.coupled(from) {
                let mut moved = h.clone();
                moved.levels[p] = to;
                moved.signature[p] += if system.quanta[to] > system.quanta[from] { 1 } else { -1 };
                moved.amplitude *= I * mu;
                next.push(moved);
            }
        }
        out = next;
    }
    out
}

/// Distinct paths with nonzero weight contributing to `select`.
pub fn enumerate_rdc_paths(system: &RdcSystem, select: PhaseSignature) -> Vec<RdcPath> {
    let hs = histories(system);
    let d = system.model.dipole();
    let mut map: BTreeMap<[(usize, usize); 3], Complex64> = BTreeMap::new();
    for k in &hs {
        for b in &hs {
            let net = [0, 1, 2].map(|p| k.signature[p] - b.signature[p]);
            if net != select.0 {
                continue;
            }
            let mu = d[(b.levels[2], k.levels[2])];
            if mu == 0.0 {
                continue;
            }
            let elements = [0, 1, 2].map(|p| (k.levels[p], b.levels[p]));
            *map.entry(elements).or_default() += b.amplitude.conj() * mu * k.amplitude;
        }
    }
    map.into_iter().filter(|(_, w)| w.norm() > 0.0).map(|(elements, weight)| RdcPath { elements, weight }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdcSettings {
    pub gamma_cm: f64,
    pub carrier_cm: f64,
    pub t_max_ps: f64,
    pub t_step_ps: f64,
    pub t2_ps: f64,
    pub pad_to: usize,
    /// Displayed ω₁/ω₃ range (cm⁻¹); `None` keeps the full transform.
    pub window_cm: Option<(f64, f64)>,
}

impl Default for RdcSettings {
    fn default() -> Self {
        Self {
            gamma_cm: DEFAULT_GAMMA_CM,
            carrier_cm: DEFAULT_CARRIER_CM,
            t_max_ps: 5.0,
            t_step_ps: 0.005,
            t2_ps: 0.0,
            pad_to: 5000,
            window_cm: Some((1850.0, 2250.0)),
        }
    }
}

impl RdcSettings {
    pub fn time_axis(&self) -> Result<Axis, Error> {
        let count = (self.t_max_ps / self.t_step_ps).round() as usize + 1;
        Ok(Axis::new(0.0, self.t_step_ps, count, "ps")?)
    }
}

/// Emitted field `i·P(t₁, t₂, t₃)` on the (t₁, t₃) grid, summed path by path
/// as outer products of the two coherence factors.
pub fn signal_grid(system: &RdcSystem, settings: &RdcSettings, select: PhaseSignature) -> Result<ComplexGrid2D, Error> {
    let t = settings.time_axis()?;
    let energies = system.rotating_energies(wavenumber_to_angular(settings.carrier_cm));
    let decay = system.model.decay();
    let mut values = Array2::<Complex64>::zeros((t.count, t.count));
    for path in enumerate_rdc_paths(system, select) {
        let w = EMISSION_PHASE * path.weight * path.factor(1, settings.t2_ps, &energies, decay);
        let u: Vec<Complex64> = (0..t.count).map(|k| w * path.factor(0, t.value(k), &energies, decay)).collect();
        let v: Vec<Complex64> = (0..t.count).map(|k| path.factor(2, t.value(k), &energies, decay)).collect();
        for (i, ui) in u.iter().enumerate() {
            for (slot, vj) in values.row_mut(i).iter_mut().zip(&v) {
                *slot += ui * vj;
            }
        }
    }
    Ok(ComplexGrid2D::new(t.clone(), t, values)?)
}

/// Purely absorptive spectrum: rephasing and non-rephasing grids, double
/// transform, ω₁-reflected rephasing plus non-rephasing real parts, axes in
/// absolute cm⁻¹, normalized to unit maximum and cropped to the window.
pub fn simulate_rdc(system: &RdcSystem, settings: &RdcSettings) -> Result<SpectrumResult, Error> {
    let pad = (settings.pad_to, settings.pad_to);
    let rephasing = double_fft(&signal_grid(system, settings, PhaseSignature::REPHASING)?, pad)?;
    let mut combined = double_fft(&signal_grid(system, settings, NON_REPHASING)?, pad)?;
    crate::spectra::absorptive_combine_into(&rephasing, &mut combined)?;
    drop(rephasing);
    let to_cm = 1.0 / wavenumber_to_angular(1.0);
    combined.axis1 = combined.axis1.rescaled(to_cm, settings.carrier_cm, "cm-1");
    combined.axis2 = combined.axis2.rescaled(to_cm, settings.carrier_cm, "cm-1");
    let mut out = SpectrumResult::new(combined, settings.carrier_cm, "rdc", Some(settings.t2_ps)).normalize_real()?;
    if let Some((lo, hi)) = settings.window_cm {
        out.grid = out.grid.crop((lo, hi), (lo, hi))?;
    }
    Ok(out
        .with_metadata("settings", settings)
        .with_metadata("display", "real part")
        .with_metadata("levels_cm", system.model.energies().iter().map(|&e| angular_to_wavenumber(e)).collect::<Vec<_>>()))
}

/// Fundamental–overtone gaps measured from a peak list (cm⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdcGaps {
    pub a: f64,
    pub s: f64,
    pub as_: f64,
}

/// Gap between the bleach at `plus` and the excited-state absorption at
/// `minus` on the row ω₁ ≈ `row`, from the nearest matching peaks.
fn measured_gap(peaks: &[Peak], row: f64, plus: f64, minus: f64, tolerance: f64) -> Option<f64> {
    let near = |sign: i8, w3: f64| {
        peaks
            .iter()
            .filter(|p| p.sign == sign && (p.omega1 - row).abs() <= tolerance && (p.omega3 - w3).abs() <= tolerance)
            .min_by(|a, b| (a.omega3 - w3).abs().total_cmp(&(b.omega3 - w3).abs()))
    };
    Some((near(1, plus)?.omega3 - near(-1, minus)?.omega3).abs())
}

/// Δ_a on the a row (a←0 bleach vs 2a←a), Δ_s on the s row (s←0 vs
/// 2s←s), Δ_as on the s row (a←0 vs as←s). Positions in cm⁻¹.
pub fn measure_gaps(system: &RdcSystem, peaks: &[Peak], tolerance: f64) -> Option<RdcGaps> {
    let w = |k| system.wavenumber(k);
    Some(RdcGaps {
        a: measured_gap(peaks, w(A), w(A), w(AA) - w(A), tolerance)?,
        s: measured_gap(peaks, w(S), w(S), w(SS) - w(S), tolerance)?,
        as_: measured_gap(peaks, w(S), w(A), w(AS) - w(S), tolerance)?,
    })
}
