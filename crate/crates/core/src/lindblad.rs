//! Reference integrators for the density matrix: a generic Lindblad master
//! equation, the hand-written nine-element rate equations of the driven
//! ladder, its perturbative variant, and the non-Hermitian evolution.
//!
//! Everything runs on a fixed-step classical RK4 over flat row-major
//! buffers. These integrators are the oracle for the closed-form kernels,
//! so they share no formulas with `rf` or `nhh`.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::OracleError;
use crate::model::{Level, MultiLevelModel, ThreeLevelModel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Density matrix (or, for the linear maps below, any operator).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn from_array(data: Array2<Complex64>) -> Self {
        assert_eq!(data.nrows(), data.ncols(), "density matrix must be square");
        Self { data: data.as_standard_layout().to_owned() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: Array2::zeros((n, n)) }
    }

    /// `|i⟩⟨j|`.
    pub fn outer(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.data[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn basis(n: usize, k: usize) -> Self {
        Self::outer(n, k, k)
    }

    pub fn pure(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let data = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn element(&self, ket: Level, bra: Level) -> Complex64 {
        self.data[(ket.index(), bra.index())]
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.data.diag().iter().map(|z| z.re).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { data: &self.data * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { data: &self.data + &other.data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn flat(&self) -> Vec<Complex64> {
        self.data.iter().copied().collect()
    }

    pub fn from_flat(n: usize, v: &[Complex64]) -> Self {
        Self { data: Array2::from_shape_vec((n, n), v.to_vec()).expect("flat length") }
    }

    /// Checks Hermiticity, unit trace and non-negative populations.
    pub fn validate(&self) -> Result<(), OracleError> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if (self.data[(i, j)] - self.data[(j, i)].conj()).norm() > 1e-9 {
                    return Err(OracleError::InvalidState(format!("not Hermitian at ({i}, {j})")));
                }
            }
            if self.data[(i, i)].re < -1e-12 {
                return Err(OracleError::InvalidState(format!("negative population at {i}")));
            }
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-9 {
            return Err(OracleError::InvalidState(format!("trace {tr} != 1")));
        }
        Ok(())
    }
}

/// Linear right-hand side `dy/dt = L y` on a flat complex buffer.
pub trait Generator {
    fn dim(&self) -> usize;
    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]);
}

/// Advances `y` by time `t` with classical RK4 using steps no longer than
/// `max_step`.
pub fn rk4<G: Generator + ?Sized>(g: &G, y: &mut [Complex64], t: f64, max_step: f64) {
    if t <= 0.0 {
        return;
    }
    let n_steps = (t / max_step - 1e-9).ceil().max(1.0) as usize;
    let h = t / n_steps as f64;
    let len = y.len();
    let mut k1 = vec![Complex64::default(); len];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for _ in 0..n_steps {
        g.apply(y, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        g.apply(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        g.apply(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + k3[i] * h;
        }
        g.apply(&tmp, &mut k4);
        for i in 0..len {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Trajectory of `g` multiplied by `e^{−ixt}`, extended by one slot that
/// accumulates the integral of component `index`.
struct Transformed<'a, G: ?Sized> {
    g: &'a G,
    x: f64,
    index: usize,
}

impl<G: Generator + ?Sized> Generator for Transformed<'_, G> {
    fn dim(&self) -> usize {
        self.g.dim() + 1
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.g.dim();
        self.g.apply(&y[..n], &mut dy[..n]);
        for k in 0..n {
            dy[k] -= I * self.x * y[k];
        }
        dy[n] = y[self.index];
    }
}

/// `∫₀^T y_index(t) e^{−ixt} dt` along the trajectory of `g` from `y0`,
/// integrated alongside the dynamics with the same RK4 scheme.
pub fn one_sided_transform<G: Generator + ?Sized>(
    g: &G,
    y0: &[Complex64],
    index: usize,
    x: f64,
    t_max: f64,
    step: f64,
) -> Complex64 {
    let aug = Transformed { g, x, index };
    let mut y = y0.to_vec();
    y.push(Complex64::default());
    rk4(&aug, &mut y, t_max, step);
    y[y0.len()]
}

/// Jump operator `|to⟩⟨from|` with the given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub to: usize,
    pub from: usize,
    pub rate: f64,
}

/// `dρ/dt = −i[H, ρ] + Σ rate (AρA† − ½{A†A, ρ})` for elementary jumps.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    n: usize,
    h: Vec<Complex64>,
    jumps: Vec<Jump>,
}

impl LindbladGenerator {
    pub fn new(h: Array2<Complex64>, jumps: Vec<Jump>) -> Self {
        let n = h.nrows();
        Self { n, h: h.iter().copied().collect(), jumps }
    }

    pub fn hamiltonian(&self) -> Array2<Complex64> {
        Array2::from_shape_vec((self.n, self.n), self.h.clone()).unwrap()
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Effective non-Hermitian Hamiltonian obtained by dropping the
    /// recycling terms `AρA†`.
    pub fn non_hermitian(&self) -> NhhGenerator {
        let mut h = self.hamiltonian();
        for j in &self.jumps {
            h[(j.from, j.from)] -= I * (0.5 * j.rate);
        }
        NhhGenerator::new(h)
    }

    /// Default RK4 step: 1/200 of the shorter of the fastest oscillation
    /// period and the fastest decay time.
    pub fn default_step(&self) -> f64 {
        let n = self.n;
        let omega_max = (0..n)
            .map(|i| (0..n).map(|j| self.h[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
            * 2.0;
        let mut loss = vec![0.0; n];
        for j in &self.jumps {
            loss[j.from] += j.rate;
        }
        let gamma_max = loss.iter().copied().fold(0.0, f64::max);
        let period = if omega_max > 0.0 { TAU / omega_max } else { f64::INFINITY };
        let decay = if gamma_max > 0.0 { 1.0 / gamma_max } else { f64::INFINITY };
        let scale = period.min(decay);
        if scale.is_finite() {
            scale / 200.0
        } else {
            1e-3
        }
    }
}

impl Generator for LindbladGenerator {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::default();
                for k in 0..n {
                    acc += self.h[i * n + k] * y[k * n + j] - y[i * n + k] * self.h[k * n + j];
                }
                dy[i * n + j] = -I * acc;
            }
        }
        for jump in &self.jumps {
            let (a, b, r) = (jump.to, jump.from, jump.rate);
            dy[a * n + a] += y[b * n + b] * r;
            for k in 0..n {
                dy[b * n + k] -= y[b * n + k] * (0.5 * r);
                dy[k * n + b] -= y[k * n + b] * (0.5 * r);
            }
        }
    }
}

/// `dρ/dt = −i(Hρ − ρH†)` with a non-Hermitian `H`.
#[derive(Debug, Clone)]
pub struct NhhGenerator {
    n: usize,
    h: Vec<Complex64>,
}

impl NhhGenerator {
    pub fn new(h: Array2<Complex64>) -> Self {
        Self { n: h.nrows(), h: h.iter().copied().collect() }
    }

    pub fn hamiltonian(&self) -> Array2<Complex64> {
        Array2::from_shape_vec((self.n, self.n), self.h.clone()).unwrap()
    }

    /// Amplitude propagation `dψ/dt = −iHψ`.
    pub fn wave(&self) -> NhhWave<'_> {
        NhhWave(self)
    }
}

impl Generator for NhhGenerator {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::default();
                for k in 0..n {
                    acc += self.h[i * n + k] * y[k * n + j] - y[i * n + k] * self.h[j * n + k].conj();
                }
                dy[i * n + j] = -I * acc;
            }
        }
    }
}

pub struct NhhWave<'a>(&'a NhhGenerator);

impl Generator for NhhWave<'_> {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.0.n;
        for (i, d) in dy.iter_mut().enumerate().take(n) {
            *d = -I * (0..n).map(|k| self.0.h[i * n + k] * y[k]).sum::<Complex64>();
        }
    }
}

/// Anything that provides a Lindblad generator.
pub trait OpenSystem {
    fn lindblad(&self) -> LindbladGenerator;

    fn nhh(&self) -> NhhGenerator {
        self.lindblad().non_hermitian()
    }
}

impl OpenSystem for ThreeLevelModel {
    /// Interaction picture with a resonant control: `H = −Ω/2 (|e⟩⟨c| + |c⟩⟨e|)`.
    fn lindblad(&self) -> LindbladGenerator {
        let (b, e, c) = (Level::B.index(), Level::E.index(), Level::C.index());
        let mut h = Array2::zeros((3, 3));
        h[(e, c)] = Complex64::new(-0.5 * self.rabi_ec, 0.0);
        h[(c, e)] = h[(e, c)];
        let jumps = vec![
            Jump { to: b, from: e, rate: self.gamma1 },
            Jump { to: e, from: b, rate: self.gamma2 },
            Jump { to: b, from: b, rate: self.gamma0_b },
            Jump { to: e, from: e, rate: self.gamma0_e },
            Jump { to: c, from: c, rate: self.gamma0_c },
        ];
        LindbladGenerator::new(h, jumps)
    }
}

impl OpenSystem for MultiLevelModel {
    /// Free Hamiltonian with pure dephasing at twice each amplitude decay,
    /// so the non-Hermitian limit decays amplitudes at exactly `decay`.
    fn lindblad(&self) -> LindbladGenerator {
        let n = self.n_levels();
        let mut h = Array2::zeros((n, n));
        for (k, e) in self.energies().iter().enumerate() {
            h[(k, k)] = Complex64::new(*e, 0.0);
        }
        let jumps = self
            .decay()
            .iter()
            .enumerate()
            .filter(|(_, k)| **k > 0.0)
            .map(|(k, rate)| Jump { to: k, from: k, rate: 2.0 * rate })
            .collect();
        LindbladGenerator::new(h, jumps)
    }
}

/// The nine coupled equations of the driven ladder written out by hand.
/// Serves as an independent check on [`LindbladGenerator`].
#[derive(Debug, Clone, Copy)]
pub struct LadderEquations {
    model: ThreeLevelModel,
    /// When set, the e–c coherences are sourced by `ρcc − ρee − ρbb`
    /// instead of `ρcc − ρee`.
    lumped_source: bool,
}

impl LadderEquations {
    pub fn new(model: ThreeLevelModel) -> Self {
        Self { model, lumped_source: false }
    }
}

const B: usize = 0;
const E: usize = 1;
const C: usize = 2;

fn at(i: usize, j: usize) -> usize {
    3 * i + j
}

impl Generator for LadderEquations {
    fn dim(&self) -> usize {
        9
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let m = &self.model;
        let half = I * (0.5 * m.rabi_ec);
        let g_eb = 0.5 * (m.gamma1 + m.gamma2 + m.gamma0_e + m.gamma0_b);
        let g_ec = 0.5 * (m.gamma1 + m.gamma0_e + m.gamma0_c);
        let g_bc = 0.5 * (m.gamma2 + m.gamma0_b + m.gamma0_c);
        let r = |i, j| y[at(i, j)];
        let mut source = r(C, C) - r(E, E);
        if self.lumped_source {
            source -= r(B, B);
        }
        dy[at(B, B)] = r(E, E) * m.gamma1 - r(B, B) * m.gamma2;
        dy[at(E, E)] = half * (r(C, E) - r(E, C)) - r(E, E) * m.gamma1 + r(B, B) * m.gamma2;
        dy[at(C, C)] = -half * (r(C, E) - r(E, C));
        dy[at(E, B)] = half * r(C, B) - r(E, B) * g_eb;
        dy[at(B, E)] = -half * r(B, C) - r(B, E) * g_eb;
        dy[at(E, C)] = half * source - r(E, C) * g_ec;
        dy[at(C, E)] = -half * source - r(C, E) * g_ec;
        dy[at(C, B)] = half * r(E, B) - r(C, B) * g_bc;
        dy[at(B, C)] = -half * r(B, E) - r(B, C) * g_bc;
    }
}

/// Perturbative variant of the ladder used by the response-function
/// kernels. The state is split in two copies: population prepared in |b⟩
/// relaxes within the b–e pair without the control field, everything else
/// evolves under the ladder equations with the lumped coherence source.
/// The physical density matrix is the sum of both copies.
#[derive(Debug, Clone, Copy)]
pub struct PerturbativeLadder {
    driven: LadderEquations,
    undriven: LadderEquations,
}

impl PerturbativeLadder {
    pub fn new(model: ThreeLevelModel) -> Self {
        let mut bare = model;
        bare.rabi_ec = 0.0;
        Self {
            driven: LadderEquations { model, lumped_source: true },
            undriven: LadderEquations::new(bare),
        }
    }

    pub fn split(rho: &DensityMatrix) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); 18];
        let flat = rho.flat();
        y[..9].copy_from_slice(&flat);
        y[9 + at(B, B)] = flat[at(B, B)];
        y[at(B, B)] = Complex64::default();
        y
    }

    pub fn merge(y: &[Complex64]) -> DensityMatrix {
        let sum: Vec<Complex64> = (0..9).map(|k| y[k] + y[9 + k]).collect();
        DensityMatrix::from_flat(3, &sum)
    }
}

impl Generator for PerturbativeLadder {
    fn dim(&self) -> usize {
        18
    }

    fn apply(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let (d, u) = dy.split_at_mut(9);
        self.driven.apply(&y[..9], d);
        self.undriven.apply(&y[9..], u);
    }
}

/// Which equation of motion drives the three-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// Full Lindblad master equation.
    Lindblad,
    /// Perturbative variant solved exactly by the response-function kernels.
    PerturbativeLindblad,
    /// Non-Hermitian Hamiltonian without recycling terms.
    Nhh,
}

/// Fixed-step integrator settings. With `tolerance` set, every integration
/// is repeated at half the step and rejected if the two disagree by more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub tolerance: Option<f64>,
}

impl IntegratorConfig {
    pub fn for_system<S: OpenSystem + ?Sized>(system: &S) -> Self {
        Self { step: system.lindblad().default_step(), tolerance: None }
    }

    pub fn with_step(step: f64) -> Self {
        Self { step, tolerance: None }
    }
}

fn checked<F>(cfg: &IntegratorConfig, run: F) -> Result<Vec<Complex64>, OracleError>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let coarse = run(cfg.step);
    let Some(tolerance) = cfg.tolerance else {
        return Ok(coarse);
    };
    let fine = run(0.5 * cfg.step);
    let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if change > tolerance {
        return Err(OracleError::StepTooLarge { step: cfg.step, change, tolerance });
    }
    Ok(fine)
}

/// Evolves an arbitrary operator with the Lindblad generator of `system`.
/// No validity checks: used for coherences such as `|e⟩⟨c|`.
pub fn evolve_operator<S: OpenSystem + ?Sized>(
    system: &S,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix, OracleError> {
    let g = system.lindblad();
    let y = checked(cfg, |h| {
        let mut y = rho0.flat();
        rk4(&g, &mut y, t, h);
        y
    })?;
    Ok(DensityMatrix::from_flat(rho0.dim(), &y))
}

/// Lindblad evolution of a valid density matrix.
pub fn integrate_master<S: OpenSystem + ?Sized>(
    system: &S,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix, OracleError> {
    rho0.validate()?;
    evolve_operator(system, rho0, t, cfg)
}

/// Non-Hermitian evolution of a valid density matrix.
pub fn integrate_nhh<S: OpenSystem + ?Sized>(
    system: &S,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix, OracleError> {
    rho0.validate()?;
    let g = system.nhh();
    let y = checked(cfg, |h| {
        let mut y = rho0.flat();
        rk4(&g, &mut y, t, h);
        y
    })?;
    Ok(DensityMatrix::from_flat(rho0.dim(), &y))
}

/// Non-Hermitian evolution of a state vector.
pub fn integrate_nhh_wave<S: OpenSystem + ?Sized>(
    system: &S,
    psi0: &[Complex64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>, OracleError> {
    let g = system.nhh();
    let wave = g.wave();
    checked(cfg, |h| {
        let mut y = psi0.to_vec();
        rk4(&wave, &mut y, t, h);
        y
    })
}

/// Incremental three-level propagation under one of the [`Dynamics`].
struct LadderStepper {
    generator: Box<dyn Generator>,
    perturbative: bool,
    y: Vec<Complex64>,
}

impl LadderStepper {
    fn new(model: &ThreeLevelModel, dynamics: Dynamics, rho0: &DensityMatrix) -> Self {
        match dynamics {
            Dynamics::Lindblad => Self { generator: Box::new(model.lindblad()), perturbative: false, y: rho0.flat() },
            Dynamics::Nhh => Self { generator: Box::new(model.nhh()), perturbative: false, y: rho0.flat() },
            Dynamics::PerturbativeLindblad => Self {
                generator: Box::new(PerturbativeLadder::new(*model)),
                perturbative: true,
                y: PerturbativeLadder::split(rho0),
            },
        }
    }

    fn advance(&mut self, dt: f64, step: f64) {
        rk4(self.generator.as_ref(), &mut self.y, dt, step);
    }

    fn state(&self) -> DensityMatrix {
        if self.perturbative {
            PerturbativeLadder::merge(&self.y)
        } else {
            DensityMatrix::from_flat(3, &self.y)
        }
    }
}

/// Three-level evolution of an arbitrary operator under the chosen
/// dynamics, sampled at ascending `times` (starting from t = 0).
pub fn ladder_trajectory(
    model: &ThreeLevelModel,
    dynamics: Dynamics,
    rho0: &DensityMatrix,
    times: &[f64],
    step: f64,
) -> Vec<DensityMatrix> {
    let mut stepper = LadderStepper::new(model, dynamics, rho0);
    let mut now = 0.0;
    times
        .iter()
        .map(|&t| {
            stepper.advance(t - now, step);
            now = t;
            stepper.state()
        })
        .collect()
}

/// Three-level evolution of an arbitrary operator to time `t`.
pub fn evolve_ladder(
    model: &ThreeLevelModel,
    dynamics: Dynamics,
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix, OracleError> {
    model.validate()?;
    let run = |h: f64| ladder_trajectory(model, dynamics, rho0, &[t], h).remove(0).flat();
    let y = checked(cfg, run)?;
    Ok(DensityMatrix::from_flat(3, &y))
}

/// Settings for [`steady_state`]: the state is advanced in chunks of
/// `chunk` until the populations change by less than `rate_tolerance` per
/// unit time, giving up after `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateConfig {
    pub step: f64,
    pub chunk: f64,
    pub horizon: f64,
    pub rate_tolerance: f64,
}

impl SteadyStateConfig {
    pub fn for_model(model: &ThreeLevelModel) -> Self {
        Self { step: model.lindblad().default_step(), chunk: 1.0, horizon: 1e5, rate_tolerance: 1e-10 }
    }
}

/// Long-time populations `[ρbb, ρee, ρcc]` of the ladder.
pub fn steady_state(
    model: &ThreeLevelModel,
    dynamics: Dynamics,
    initial: &DensityMatrix,
    cfg: &SteadyStateConfig,
) -> Result<Vec<f64>, OracleError> {
    model.validate()?;
    initial.validate()?;
    let mut stepper = LadderStepper::new(model, dynamics, initial);
    let mut last = initial.populations();
    let mut t = 0.0;
    let mut rate = f64::INFINITY;
    while t < cfg.horizon {
        stepper.advance(cfg.chunk, cfg.step);
        t += cfg.chunk;
        let p = stepper.state().populations();
        rate = p.iter().zip(&last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / cfg.chunk;
        last = p;
        if rate < cfg.rate_tolerance {
            return Ok(last);
        }
    }
    Err(OracleError::NotConverged { horizon: cfg.horizon, rate })
}
