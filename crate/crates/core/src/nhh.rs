//! Non-Hermitian-Hamiltonian engine: closed-form propagation coefficients
//! of the driven ladder, quasi-Green functions, phase-tagged pulse
//! operators and automatic Liouville-path enumeration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::EngineError;
use crate::model::{DerivedRates, Level};
use crate::rf::sin_over;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The emitted field is proportional to `i` times the polarization; the
/// displayed spectrum of a polarization `P` is `Re(EMISSION_PHASE · P)`.
pub const EMISSION_PHASE: Complex64 = I;

/// Free-evolution amplitudes `C_ik(t) = ⟨i|U(t)|k⟩` of the ladder under the
/// non-Hermitian Hamiltonian (interaction picture, resonant control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeCoefficients {
    pub bb: Complex64,
    pub ee: Complex64,
    pub ce: Complex64,
    pub ec: Complex64,
    pub cc: Complex64,
}

impl FreeCoefficients {
    /// `⟨to|U|from⟩`; zero for pairs the evolution never connects.
    pub fn get(&self, to: Level, from: Level) -> Complex64 {
        match (to, from) {
            (Level::B, Level::B) => self.bb,
            (Level::E, Level::E) => self.ee,
            (Level::C, Level::E) => self.ce,
            (Level::E, Level::C) => self.ec,
            (Level::C, Level::C) => self.cc,
            _ => Complex64::default(),
        }
    }
}

pub fn free_coeffs(t: f64, rates: &DerivedRates) -> FreeCoefficients {
    let w = rates.omega_tilde_minus;
    let damp = (-0.5 * rates.gamma_ec_plus * t).exp();
    let cos = (0.5 * w * t).cos();
    // sin(w t/2)/w, finite at w = 0.
    let sin = sin_over(w, 0.5 * t);
    let skew = 0.5 * rates.gamma_ec_minus * sin;
    let ce = damp * I * rates.rabi_ec * sin;
    FreeCoefficients {
        bb: Complex64::new((-0.5 * rates.gamma_b * t).exp(), 0.0),
        ee: damp * (cos - skew),
        ce,
        ec: ce,
        cc: damp * (cos + skew),
    }
}

/// Density-matrix element `|ket⟩⟨bra|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element {
    pub ket: Level,
    pub bra: Level,
}

impl Element {
    pub const fn new(ket: Level, bra: Level) -> Self {
        Self { ket, bra }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}><{}|", self.ket.label(), self.bra.label())
    }
}

/// Quasi-Green function kinds, named final element then initial element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuasiGreenKind {
    Bebe,
    Bcbe,
    Ebeb,
    Ebcb,
    Bbbb,
    Eeee,
    Ceee,
    Eeec,
    Ceec,
}

impl QuasiGreenKind {
    pub const ALL: [QuasiGreenKind; 9] = [
        QuasiGreenKind::Bebe,
        QuasiGreenKind::Bcbe,
        QuasiGreenKind::Ebeb,
        QuasiGreenKind::Ebcb,
        QuasiGreenKind::Bbbb,
        QuasiGreenKind::Eeee,
        QuasiGreenKind::Ceee,
        QuasiGreenKind::Eeec,
        QuasiGreenKind::Ceec,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QuasiGreenKind::Bebe => "bebe",
            QuasiGreenKind::Bcbe => "bcbe",
            QuasiGreenKind::Ebeb => "ebeb",
            QuasiGreenKind::Ebcb => "ebcb",
            QuasiGreenKind::Bbbb => "bbbb",
            QuasiGreenKind::Eeee => "eeee",
            QuasiGreenKind::Ceee => "ceee",
            QuasiGreenKind::Eeec => "eeec",
            QuasiGreenKind::Ceec => "ceec",
        }
    }

    pub fn from_label(label: &str) -> Result<Self, EngineError> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == label)
            .ok_or_else(|| EngineError::UnknownKind(label.to_string()))
    }

    fn levels(self) -> [Level; 4] {
        let b = self.label().as_bytes();
        let lv = |c: u8| match c {
            b'b' => Level::B,
            b'e' => Level::E,
            _ => Level::C,
        };
        [lv(b[0]), lv(b[1]), lv(b[2]), lv(b[3])]
    }

    pub fn final_element(self) -> Element {
        let l = self.levels();
        Element::new(l[0], l[1])
    }

    pub fn initial_element(self) -> Element {
        let l = self.levels();
        Element::new(l[2], l[3])
    }

    pub fn from_transition(initial: Element, to: Element) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.initial_element() == initial && k.final_element() == to)
    }

    pub fn is_frequency(self) -> bool {
        matches!(self, QuasiGreenKind::Bebe | QuasiGreenKind::Bcbe | QuasiGreenKind::Ebeb | QuasiGreenKind::Ebcb)
    }

    /// Carrier sign: +1 for coherences with |e⟩ on the bra side (first
    /// delay), −1 with |e⟩ on the ket side (detection), 0 for waiting-time kinds.
    fn carrier(self) -> f64 {
        match self {
            QuasiGreenKind::Bebe | QuasiGreenKind::Bcbe => 1.0,
            QuasiGreenKind::Ebeb | QuasiGreenKind::Ebcb => -1.0,
            _ => 0.0,
        }
    }
}

/// `C_ik(t) · C*_jl(t)` for the transition `|k⟩⟨l| → |i⟩⟨j|`, without carrier.
pub fn element_propagator(initial: Element, to: Element, c: &FreeCoefficients) -> Complex64 {
    c.get(to.ket, initial.ket) * c.get(to.bra, initial.bra).conj()
}

/// Quasi-Green function in the time domain. The optical carrier
/// `e^{±iω_e t}` is included for the optical-coherence kinds; waiting-time
/// kinds carry none.
pub fn quasi_green_time(kind: QuasiGreenKind, t: f64, rates: &DerivedRates, omega_e: f64) -> Result<Complex64, EngineError> {
    if t < 0.0 {
        return Err(EngineError::NegativeTime(t));
    }
    let c = free_coeffs(t, rates);
    let value = element_propagator(kind.initial_element(), kind.final_element(), &c);
    Ok(value * Complex64::from_polar(1.0, kind.carrier() * omega_e * t))
}

/// Carrier-free quasi-Green function (rotating frame).
pub fn quasi_green_rotating(kind: QuasiGreenKind, t: f64, rates: &DerivedRates) -> Complex64 {
    element_propagator(kind.initial_element(), kind.final_element(), &free_coeffs(t, rates))
}

/// One-sided Fourier transform of the optical quasi-Green functions at
/// absolute frequency `omega`. First-delay kinds use the kernel `e^{−iωt}`,
/// detection kinds `e^{+iωt}`.
pub fn quasi_green_freq(kind: QuasiGreenKind, omega: f64, rates: &DerivedRates, omega_e: f64) -> Result<Complex64, EngineError> {
    quasi_green_freq_detuned(kind, omega - omega_e, rates)
}

/// [`quasi_green_freq`] with `x = ω − ω_e` given directly.
pub fn quasi_green_freq_detuned(kind: QuasiGreenKind, x: f64, rates: &DerivedRates) -> Result<Complex64, EngineError> {
    let s = rates.gamma_b + rates.gamma_ec_plus;
    let w2 = rates.omega_tilde_minus * rates.omega_tilde_minus;
    let down = Complex64::new(s, 2.0 * x);
    let up = Complex64::new(s, -2.0 * x);
    let check = |d: Complex64| {
        if d.norm() == 0.0 {
            Err(EngineError::Singular { kind: kind.label(), at: x })
        } else {
            Ok(d)
        }
    };
    match kind {
        QuasiGreenKind::Bebe => Ok((2.0 * down - rates.gamma_ec_minus) / check(w2 + down * down)?),
        QuasiGreenKind::Ebeb => Ok((2.0 * up - rates.gamma_ec_minus) / check(w2 + up * up)?),
        QuasiGreenKind::Bcbe => Ok(-2.0 * I * rates.rabi_ec / check(w2 + down * down)?),
        QuasiGreenKind::Ebcb => Ok(2.0 * I * rates.rabi_ec / check(w2 + up * up)?),
        _ => Err(EngineError::WrongDomain { kind: kind.label(), expected: "time" }),
    }
}

/// Integer wave-vector multipliers of the three pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PhaseSignature(pub [i8; 3]);

impl PhaseSignature {
    /// `−k_a + k_b + k_c`.
    pub const REPHASING: PhaseSignature = PhaseSignature([-1, 1, 1]);
    /// `+k_a − k_b + k_c`.
    pub const NON_REPHASING: PhaseSignature = PhaseSignature([1, -1, 1]);

    pub fn unit(pulse: Pulse, sign: i8) -> Self {
        let mut s = [0; 3];
        s[pulse.index()] = sign;
        Self(s)
    }

    pub fn get(&self, pulse: Pulse) -> i8 {
        self.0[pulse.index()]
    }

    pub fn total(&self) -> i32 {
        self.0.iter().map(|&n| n as i32).sum()
    }
}

impl Add for PhaseSignature {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for PhaseSignature {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for PhaseSignature {
    type Output = Self;
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Display for PhaseSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+},{:+},{:+})", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pulse {
    A,
    B,
    C,
}

impl Pulse {
    pub const ALL: [Pulse; 3] = [Pulse::A, Pulse::B, Pulse::C];

    pub fn index(self) -> usize {
        match self {
            Pulse::A => 0,
            Pulse::B => 1,
            Pulse::C => 2,
        }
    }
}

/// One phase-tagged component of a state vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasedAmplitude {
    pub level: Level,
    pub amplitude: Complex64,
    pub signature: PhaseSignature,
}

/// Sums amplitudes that share level and signature. Order of first
/// appearance is kept.
pub fn merge(state: Vec<PhasedAmplitude>) -> Vec<PhasedAmplitude> {
    let mut out: Vec<PhasedAmplitude> = Vec::with_capacity(state.len());
    for a in state {
        match out.iter_mut().find(|o| o.level == a.level && o.signature == a.signature) {
            Some(o) => o.amplitude += a.amplitude,
            None => out.push(a),
        }
    }
    out
}

/// Branches produced by one square probe pulse acting on a single level:
/// `(target level, factor, signature change)`.
fn pulse_branches(level: Level, rates: &DerivedRates) -> Vec<(Level, Complex64, i8)> {
    let n = Complex64::new(rates.norm, 0.0);
    match level {
        Level::B => vec![(Level::B, n, 0), (Level::E, n * rates.beta, 1)],
        Level::E => vec![(Level::B, n * rates.beta, -1), (Level::E, n, 0)],
        Level::C => vec![(Level::C, Complex64::new(1.0, 0.0), 0)],
    }
}

/// Applies probe pulse `pulse` to a phase-tagged state vector. Excitation
/// b→e picks up `e^{+ik}`, de-excitation e→b picks up `e^{−ik}`; the
/// bra side of a density matrix is handled by conjugation when branches
/// are paired.
pub fn pulse_apply(state: &[PhasedAmplitude], pulse: Pulse, rates: &DerivedRates) -> Vec<PhasedAmplitude> {
    let mut out = Vec::with_capacity(2 * state.len());
    for a in state {
        for (level, factor, dk) in pulse_branches(a.level, rates) {
            out.push(PhasedAmplitude {
                level,
                amplitude: a.amplitude * factor,
                signature: a.signature + PhaseSignature::unit(pulse, dk),
            });
        }
    }
    merge(out)
}

/// Free evolution of a phase-tagged state for time `t`.
pub fn free_evolve(state: &[PhasedAmplitude], t: f64, rates: &DerivedRates) -> Vec<PhasedAmplitude> {
    let c = free_coeffs(t, rates);
    let mut out = Vec::with_capacity(2 * state.len());
    for a in state {
        for to in Level::ALL {
            let f = c.get(to, a.level);
            if f != Complex64::default() {
                out.push(PhasedAmplitude { level: to, amplitude: a.amplitude * f, signature: a.signature });
            }
        }
    }
    merge(out)
}

/// Element of `|ψ⟩⟨ψ|` restricted to ket/bra pairs with net signature
/// `select` (ket signature minus bra signature).
pub fn select_element(state: &[PhasedAmplitude], select: PhaseSignature, element: Element) -> Complex64 {
    let mut acc = Complex64::default();
    for k in state.iter().filter(|a| a.level == element.ket) {
        for b in state.iter().filter(|a| a.level == element.bra) {
            if k.signature - b.signature == select {
                acc += k.amplitude * b.amplitude.conj();
            }
        }
    }
    acc
}

/// Third-order polarization (rotating frame) at delays `t1, t2, t3` by
/// direct propagation of the phase-tagged wavefunction from |b⟩.
pub fn polarization_direct(select: PhaseSignature, t1: f64, t2: f64, t3: f64, rates: &DerivedRates) -> Complex64 {
    let mut psi = vec![PhasedAmplitude {
        level: Level::B,
        amplitude: Complex64::new(1.0, 0.0),
        signature: PhaseSignature::default(),
    }];
    for (pulse, delay) in [(Pulse::A, t1), (Pulse::B, t2), (Pulse::C, t3)] {
        psi = pulse_apply(&psi, pulse, rates);
        psi = free_evolve(&psi, delay, rates);
    }
    select_element(&psi, select, emitting_element(select))
}

/// The coherence that radiates in the direction `select`.
pub fn emitting_element(select: PhaseSignature) -> Element {
    if select.total() > 0 {
        Element::new(Level::E, Level::B)
    } else {
        Element::new(Level::B, Level::E)
    }
}

/// Delay interval between pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interval {
    T1,
    T2,
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub interval: Interval,
    pub from: Element,
    pub to: Element,
}

/// A chain of density-matrix elements through the three delays together
/// with its pulse prefactor (β and N factors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvillePath {
    pub steps: [PathStep; 3],
    pub weight: Complex64,
}

impl LiouvillePath {
    /// Quasi-Green kinds for the three delays, when all are tabulated.
    pub fn kinds(&self) -> Option<[QuasiGreenKind; 3]> {
        let k = |s: &PathStep| QuasiGreenKind::from_transition(s.from, s.to);
        Some([k(&self.steps[0])?, k(&self.steps[1])?, k(&self.steps[2])?])
    }

    /// Time-domain contribution in the rotating frame.
    pub fn evaluate_time(&self, t1: f64, t2: f64, t3: f64, rates: &DerivedRates) -> Complex64 {
        self.steps.iter().zip([t1, t2, t3]).fold(self.weight, |acc, (s, t)| {
            acc * element_propagator(s.from, s.to, &free_coeffs(t, rates))
        })
    }

    /// Mixed-domain contribution: closed-form transforms over the first
    /// and detection delays, time-domain kernel over the waiting time.
    pub fn evaluate_freq(&self, x3: f64, t2: f64, x1: f64, rates: &DerivedRates) -> Result<Complex64, EngineError> {
        let [k1, k2, k3] = self.kinds().ok_or_else(|| EngineError::UnknownKind(format!("{:?}", self.steps)))?;
        Ok(self.weight
            * quasi_green_freq_detuned(k1, x1, rates)?
            * quasi_green_rotating(k2, t2, rates)
            * quasi_green_freq_detuned(k3, x3, rates)?)
    }
}

/// One symbolic branch of the wavefunction: levels at the start and end of
/// each delay, accumulated pulse prefactor and signature.
#[derive(Debug, Clone, Copy)]
struct Branch {
    levels: [Level; 6],
    factor: Complex64,
    signature: PhaseSignature,
}

fn enumerate_branches(rates: &DerivedRates) -> Vec<Branch> {
    let connected = |to: Level, from: Level| match (to, from) {
        (Level::B, Level::B) | (Level::E, Level::E) | (Level::C, Level::C) => true,
        (Level::E, Level::C) | (Level::C, Level::E) => rates.rabi_ec != 0.0,
        _ => false,
    };
    let mut branches = vec![(Vec::new(), Level::B, Complex64::new(1.0, 0.0), PhaseSignature::default())];
    for pulse in Pulse::ALL {
        let mut next = Vec::new();
        for (levels, level, factor, sig) in branches {
            for (after, f, dk) in pulse_branches(level, rates) {
                for to in Level::ALL.into_iter().filter(|&to| connected(to, after)) {
                    let mut l: Vec<Level> = levels.clone();
                    l.push(after);
                    l.push(to);
                    next.push((l, to, factor * f, sig + PhaseSignature::unit(pulse, dk)));
                }
            }
        }
        branches = next;
    }
    branches
        .into_iter()
        .map(|(l, _, factor, signature)| Branch { levels: [l[0], l[1], l[2], l[3], l[4], l[5]], factor, signature })
        .collect()
}

/// All Liouville paths from |b⟩⟨b| that radiate in direction `select`.
/// Ket and bra branches are paired when their signatures differ by
/// `select` and they end in the emitting coherence; chains that coincide
/// have their weights summed.
pub fn enumerate_paths(rates: &DerivedRates, select: PhaseSignature) -> Vec<LiouvillePath> {
    let branches = enumerate_branches(rates);
    let emit = emitting_element(select);
    let intervals = [Interval::T1, Interval::T2, Interval::T3];
    let mut paths: Vec<LiouvillePath> = Vec::new();
    for k in &branches {
        for b in &branches {
            if k.signature - b.signature != select || Element::new(k.levels[5], b.levels[5]) != emit {
                continue;
            }
            let steps = [0, 1, 2].map(|n| PathStep {
                interval: intervals[n],
                from: Element::new(k.levels[2 * n], b.levels[2 * n]),
                to: Element::new(k.levels[2 * n + 1], b.levels[2 * n + 1]),
            });
            let weight = k.factor * b.factor.conj();
            match paths.iter_mut().find(|p| p.steps == steps) {
                Some(p) => p.weight += weight,
                None => paths.push(LiouvillePath { steps, weight }),
            }
        }
    }
    paths
}

/// Sum of the enumerated paths in the mixed frequency/time domain.
pub fn signal_from_paths(paths: &[LiouvillePath], x3: f64, t2: f64, x1: f64, rates: &DerivedRates) -> Result<Complex64, EngineError> {
    paths.iter().map(|p| p.evaluate_freq(x3, t2, x1, rates)).sum()
}

/// Rephasing polarization of the non-Hermitian engine in its five-term
/// closed form: ground-state bleach, excited-state evolution, e→c and c→e
/// transfer during the waiting time, and the e–c coherence path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NhhSignal {
    pub terms: [Complex64; 5],
}

impl NhhSignal {
    pub fn total(&self) -> Complex64 {
        self.terms.iter().sum()
    }
}

/// Five-term rephasing signal at detunings `x3`, `x1` from `omega_e`.
pub fn rp_signal_nhh_detuned(x3: f64, t2: f64, x1: f64, rates: &DerivedRates) -> Result<NhhSignal, EngineError> {
    let q = |k, x| quasi_green_freq_detuned(k, x, rates);
    let g = |k| quasi_green_rotating(k, t2, rates);
    let n = rates.norm;
    let b = rates.beta;
    let bebe = q(QuasiGreenKind::Bebe, x1)?;
    let bcbe = q(QuasiGreenKind::Bcbe, x1)?;
    let ebeb = q(QuasiGreenKind::Ebeb, x3)?;
    let ebcb = q(QuasiGreenKind::Ebcb, x3)?;
    let lead = n * n * n * n * b.conj();
    Ok(NhhSignal {
        terms: [
            lead * n * n * b.conj() * b * bebe * g(QuasiGreenKind::Bbbb) * ebeb,
            lead * n * n * b * b.conj() * bebe * g(QuasiGreenKind::Eeee) * ebeb,
            lead * n * b * b.conj() * bebe * g(QuasiGreenKind::Ceee) * ebcb,
            lead * n * b * b.conj() * bcbe * g(QuasiGreenKind::Eeec) * ebeb,
            lead * b * b.conj() * bcbe * g(QuasiGreenKind::Ceec) * ebcb,
        ],
    })
}

pub fn rp_signal_nhh(omega3: f64, t2: f64, omega1: f64, rates: &DerivedRates, omega_e: f64) -> Result<NhhSignal, EngineError> {
    rp_signal_nhh_detuned(omega3 - omega_e, t2, omega1 - omega_e, rates)
}
