//! Non-Hermitian engine against numerical propagation, and the two
//! independent assemblies of the rephasing signal against each other.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use twodcs::lindblad::{
    integrate_nhh, integrate_nhh_wave, ladder_trajectory, one_sided_transform, DensityMatrix, Dynamics,
    IntegratorConfig, OpenSystem,
};
use twodcs::model::{derive_rates, DerivedRates, Level, ThreeLevelModel};
use twodcs::nhh::{
    enumerate_paths, free_coeffs, polarization_direct, quasi_green_freq, quasi_green_freq_detuned,
    quasi_green_rotating, quasi_green_time, rp_signal_nhh_detuned, signal_from_paths, Element, Interval,
    LiouvillePath, PhaseSignature, QuasiGreenKind,
};
use twodcs::rf::{green_freq_detuned, GreenKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn model() -> ThreeLevelModel {
    ThreeLevelModel::propanediol()
}

fn rates() -> DerivedRates {
    derive_rates(&model()).unwrap()
}

fn basis(k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); 3];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

#[test]
fn coefficients_match_wavefunction_integration() {
    let m = model();
    let r = rates();
    let cfg = IntegratorConfig::with_step(5e-4);
    for t in [0.05, 0.24, 0.5, 1.7, 4.0, 10.0] {
        let c = free_coeffs(t, &r);
        for from in Level::ALL {
            let psi = integrate_nhh_wave(&m, &basis(from.index()), t, &cfg).unwrap();
            for to in Level::ALL {
                let dev = (psi[to.index()] - c.get(to, from)).norm();
                assert!(dev < 1e-9, "C_{}{} at {t}: {dev:e}", to.label(), from.label());
            }
        }
    }
}

#[test]
fn coefficients_match_with_unequal_dephasing() {
    let mut m = model();
    m.gamma0_c = TAU * 0.3;
    m.gamma0_e = TAU * 0.05;
    m.gamma1 = TAU * 0.02;
    let r = derive_rates(&m).unwrap();
    let cfg = IntegratorConfig::with_step(5e-4);
    for t in [0.3, 2.0, 6.0] {
        let c = free_coeffs(t, &r);
        let psi = integrate_nhh_wave(&m, &basis(1), t, &cfg).unwrap();
        assert!((psi[1] - c.ee).norm() < 1e-9);
        assert!((psi[2] - c.ce).norm() < 1e-9);
        let psi = integrate_nhh_wave(&m, &basis(2), t, &cfg).unwrap();
        assert!((psi[2] - c.cc).norm() < 1e-9);
        assert!((psi[1] - c.ec).norm() < 1e-9);
    }
}

#[test]
fn norm_loss_vanishes_only_without_damping() {
    let r = rates();
    for t in [0.1, 1.0, 5.0] {
        let c = free_coeffs(t, &r);
        assert!(c.ee.norm_sqr() + c.ce.norm_sqr() < 1.0);
    }
    let mut m = model();
    m.gamma1 = 0.0;
    m.gamma2 = 0.0;
    m.gamma0_b = 0.0;
    m.gamma0_e = 0.0;
    m.gamma0_c = 0.0;
    let r = derive_rates(&m).unwrap();
    for t in [0.1, 1.0, 5.0] {
        let c = free_coeffs(t, &r);
        assert!((c.ee.norm_sqr() + c.ce.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

/// Every waiting-time quasi-Green function is the matching element of the
/// density matrix evolved with the jump-free equation.
#[test]
fn quasi_green_functions_match_density_integration() {
    let m = model();
    let r = rates();
    let ts: Vec<f64> = (1..=50).map(|k| 0.2 * k as f64).collect();
    for kind in QuasiGreenKind::ALL {
        let init = kind.initial_element();
        let fin = kind.final_element();
        let rho0 = DensityMatrix::outer(3, init.ket.index(), init.bra.index());
        let traj = ladder_trajectory(&m, Dynamics::Nhh, &rho0, &ts, 1e-3);
        for (&t, rho) in ts.iter().zip(&traj) {
            let dev = (rho.element(fin.ket, fin.bra) - quasi_green_rotating(kind, t, &r)).norm();
            assert!(dev < 1e-9, "{} at {t}: {dev:e}", kind.label());
        }
    }
}

#[test]
fn quasi_green_carrier_and_symmetries() {
    let m = model();
    let r = rates();
    for k in 0..200 {
        let t = 0.05 * k as f64;
        let bbbb = quasi_green_time(QuasiGreenKind::Bbbb, t, &r, m.omega_e).unwrap();
        assert!((bbbb - quasi_green_rotating(QuasiGreenKind::Bbbb, t, &r)).norm() < 1e-15);
        for kind in [QuasiGreenKind::Ceee, QuasiGreenKind::Eeec] {
            assert!(quasi_green_time(kind, t, &r, m.omega_e).unwrap().re.abs() < 1e-12);
        }
        let bebe = quasi_green_time(QuasiGreenKind::Bebe, t, &r, m.omega_e).unwrap();
        let rot = quasi_green_rotating(QuasiGreenKind::Bebe, t, &r);
        assert!((bebe.norm() - rot.norm()).abs() < 1e-12);
    }
    assert_eq!(quasi_green_time(QuasiGreenKind::Bbbb, 0.0, &r, m.omega_e).unwrap(), Complex64::new(1.0, 0.0));
    assert!(quasi_green_time(QuasiGreenKind::Eeee, -1.0, &r, m.omega_e).is_err());
}

/// Closed-form transforms against the same one-sided transform integrated
/// alongside the jump-free dynamics.
#[test]
fn frequency_forms_match_transformed_trajectories() {
    let r = rates();
    let g = model().nhh();
    for kind in [QuasiGreenKind::Bebe, QuasiGreenKind::Bcbe, QuasiGreenKind::Ebeb, QuasiGreenKind::Ebcb] {
        let init = kind.initial_element();
        let fin = kind.final_element();
        let sign = if fin.bra == Level::B { -1.0 } else { 1.0 };
        let y0 = DensityMatrix::outer(3, init.ket.index(), init.bra.index()).flat();
        for k in -8..=8 {
            let x = TAU * 0.5 * k as f64;
            let numeric = one_sided_transform(&g, &y0, 3 * fin.ket.index() + fin.bra.index(), sign * x, 60.0, 2e-3);
            let closed = quasi_green_freq_detuned(kind, x, &r).unwrap();
            assert!((numeric - closed).norm() < 1e-7, "{} at {x}: {numeric} vs {closed}", kind.label());
        }
    }
}

/// Trapezoid-weighted Riemann sum of rotating-frame samples against the
/// closed form near the absorption maxima.
#[test]
fn frequency_forms_match_discrete_transform() {
    let r = rates();
    let dt = 2e-3;
    let n = 30_000;
    for (kind, sign) in [(QuasiGreenKind::Bebe, 1.0), (QuasiGreenKind::Ebeb, -1.0)] {
        for x in [-TAU, TAU, 0.4] {
            let dft: Complex64 = (0..n)
                .map(|k| {
                    let t = k as f64 * dt;
                    let w = if k == 0 { 0.5 } else { 1.0 };
                    w * quasi_green_rotating(kind, t, &r) * Complex64::from_polar(1.0, -sign * x * t)
                })
                .sum::<Complex64>()
                * dt;
            let closed = quasi_green_freq_detuned(kind, x, &r).unwrap();
            assert!((dft - closed).norm() < 1e-3 * closed.norm(), "{}: {dft} vs {closed}", kind.label());
        }
    }
}

#[test]
fn absolute_frequency_form_matches_detuned_form() {
    let m = model();
    let r = rates();
    for kind in [QuasiGreenKind::Bebe, QuasiGreenKind::Ebeb, QuasiGreenKind::Bcbe, QuasiGreenKind::Ebcb] {
        let a = quasi_green_freq(kind, m.omega_e + 0.7, &r, m.omega_e).unwrap();
        let b = quasi_green_freq_detuned(kind, 0.7, &r).unwrap();
        assert!((a - b).norm() < 1e-6 * b.norm(), "{}", kind.label());
    }
}

#[test]
fn control_transfer_vanishes_without_control() {
    let mut m = model();
    m.rabi_ec = 0.0;
    let r = derive_rates(&m).unwrap();
    for k in -10..=10 {
        assert_eq!(quasi_green_freq_detuned(QuasiGreenKind::Bcbe, k as f64, &r).unwrap().norm(), 0.0);
    }
}

/// With equal pure dephasing on all levels the non-Hermitian transforms
/// coincide with the response-function kernels up to the factors ±i.
#[test]
fn quasi_green_transforms_match_green_functions() {
    let r = rates();
    let pairs = [
        (GreenKind::BebeW, QuasiGreenKind::Bebe, I),
        (GreenKind::EbebW, QuasiGreenKind::Ebeb, -I),
        (GreenKind::BcbeW, QuasiGreenKind::Bcbe, I),
        (GreenKind::EbcbW, QuasiGreenKind::Ebcb, -I),
    ];
    for (g, q, factor) in pairs {
        for k in -80..=80 {
            let x = TAU * 0.05 * k as f64;
            let a = green_freq_detuned(g, x, &r).unwrap();
            let b = factor * quasi_green_freq_detuned(q, x, &r).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1e-3), "{} at {x}", q.label());
        }
    }
}

fn expected_rephasing_chains() -> Vec<[(Element, Element); 3]> {
    use Level::*;
    let el = Element::new;
    vec![
        [(el(B, E), el(B, E)), (el(B, B), el(B, B)), (el(E, B), el(E, B))],
        [(el(B, E), el(B, E)), (el(E, E), el(E, E)), (el(E, B), el(E, B))],
        [(el(B, E), el(B, E)), (el(E, E), el(C, E)), (el(C, B), el(E, B))],
        [(el(B, E), el(B, C)), (el(E, C), el(E, E)), (el(E, B), el(E, B))],
        [(el(B, E), el(B, C)), (el(E, C), el(C, E)), (el(C, B), el(E, B))],
    ]
}

fn chain(p: &LiouvillePath) -> [(Element, Element); 3] {
    p.steps.map(|s| (s.from, s.to))
}

#[test]
fn rephasing_enumeration_gives_the_five_paths() {
    let paths = enumerate_paths(&rates(), PhaseSignature::REPHASING);
    assert_eq!(paths.len(), 5);
    for expected in expected_rephasing_chains() {
        assert_eq!(paths.iter().filter(|p| chain(p) == expected).count(), 1, "missing {expected:?}");
    }
    for p in &paths {
        assert_eq!(p.steps.map(|s| s.interval), [Interval::T1, Interval::T2, Interval::T3]);
        assert!(p.kinds().is_some());
    }
}

#[test]
fn conjugate_direction_gives_conjugate_paths() {
    let r = rates();
    let paths = enumerate_paths(&r, -PhaseSignature::REPHASING);
    assert_eq!(paths.len(), 5);
    let swap = |e: Element| Element::new(e.bra, e.ket);
    let forward = enumerate_paths(&r, PhaseSignature::REPHASING);
    for p in &paths {
        assert_eq!(p.steps[2].to, Element::new(Level::B, Level::E));
        let mirrored = chain(p).map(|(a, b)| (swap(a), swap(b)));
        let partner = forward.iter().find(|f| chain(f) == mirrored).expect("partner path");
        assert!((partner.weight - p.weight.conj()).norm() < 1e-15);
    }
}

#[test]
fn without_control_two_paths_survive() {
    let mut m = model();
    m.rabi_ec = 0.0;
    let paths = enumerate_paths(&derive_rates(&m).unwrap(), PhaseSignature::REPHASING);
    assert_eq!(paths.len(), 2);
    let expected = expected_rephasing_chains();
    for p in &paths {
        assert!(expected[..2].contains(&chain(p)));
    }
}

/// Pulse prefactor of one side of a path recomputed from its level chain:
/// a pulse leaves |c⟩ alone, multiplies an untouched b or e by N and a
/// b↔e transition by Nβ.
fn side_factor(levels: [Level; 3], before: [Level; 3], r: &DerivedRates) -> Complex64 {
    let mut f = Complex64::new(1.0, 0.0);
    for (pre, post) in before.iter().zip(levels) {
        f *= match (pre, post) {
            (Level::C, Level::C) => Complex64::new(1.0, 0.0),
            (a, b) if *a == b => Complex64::new(r.norm, 0.0),
            _ => r.norm * r.beta,
        };
    }
    f
}

#[test]
fn path_weights_follow_from_their_chains() {
    let r = rates();
    for p in enumerate_paths(&r, PhaseSignature::REPHASING) {
        let s = p.steps;
        let ket = side_factor([s[0].from.ket, s[1].from.ket, s[2].from.ket], [Level::B, s[0].to.ket, s[1].to.ket], &r);
        let bra = side_factor([s[0].from.bra, s[1].from.bra, s[2].from.bra], [Level::B, s[0].to.bra, s[1].to.bra], &r);
        let w = ket * bra.conj();
        assert!((p.weight - w).norm() < 1e-12 * w.norm());
    }
}

/// Path weights against the printed five-term prefactors, keyed by the
/// waiting-time kernel of each path.
#[test]
fn path_weights_match_closed_form_prefactors() {
    let r = rates();
    let (n, b) = (r.norm, r.beta);
    let lead = n * n * n * n * b.conj();
    let expected: BTreeMap<&str, Complex64> = [
        ("bbbb", lead * n * n * b.conj() * b),
        ("eeee", lead * n * n * b * b.conj()),
        ("ceee", lead * n * b * b.conj()),
        ("eeec", lead * n * b * b.conj()),
        ("ceec", lead * b * b.conj()),
    ]
    .into_iter()
    .collect();
    for p in enumerate_paths(&r, PhaseSignature::REPHASING) {
        let kind = p.kinds().unwrap()[1];
        let e = expected[kind.label()];
        assert!((p.weight - e).norm() < 1e-12 * e.norm(), "{}: {} vs {}", kind.label(), p.weight, e);
    }
}

#[test]
fn enumerated_signal_matches_closed_form() {
    let r = rates();
    let paths = enumerate_paths(&r, PhaseSignature::REPHASING);
    for t2 in [0.0, 0.24, 0.5, 3.0] {
        for (x3, x1) in [(-TAU, -TAU), (TAU, -TAU), (0.3, 2.2), (-9.0, 14.0)] {
            let a = signal_from_paths(&paths, x3, t2, x1, &r).unwrap();
            let b = rp_signal_nhh_detuned(x3, t2, x1, &r).unwrap().total();
            assert!((a - b).norm() <= 1e-10 * b.norm());
        }
    }
}

/// Direct propagation of the merged phase-tagged wavefunction agrees with
/// the sum over enumerated paths in the time domain.
#[test]
fn wavefunction_propagation_matches_path_sum() {
    let r = rates();
    let paths = enumerate_paths(&r, PhaseSignature::REPHASING);
    for (t1, t2, t3) in [(0.1, 0.0, 0.2), (0.7, 0.24, 1.3), (2.0, 5.0, 0.4)] {
        let direct = polarization_direct(PhaseSignature::REPHASING, t1, t2, t3, &r);
        let summed: Complex64 = paths.iter().map(|p| p.evaluate_time(t1, t2, t3, &r)).sum();
        assert!((direct - summed).norm() < 1e-14, "{direct} vs {summed}");
        let conj = polarization_direct(-PhaseSignature::REPHASING, t1, t2, t3, &r);
        assert!((conj - direct.conj()).norm() < 1e-15);
    }
}

/// Fully numerical route: phase-tagged amplitudes propagated by RK4 with the
/// non-Hermitian Hamiltonian, pulses applied with their first-order branch
/// rules. Independent of the closed-form coefficients.
#[test]
fn numerical_wavefunction_route_matches_closed_form_polarization() {
    let m = model();
    let r = rates();
    let cfg = IntegratorConfig::with_step(5e-4);
    let (t1, t2, t3) = (0.6, 0.3, 0.9);
    type State = BTreeMap<[i8; 3], Vec<Complex64>>;
    let mut psi: State = BTreeMap::new();
    psi.insert([0, 0, 0], basis(0));
    for (p, delay) in [(0usize, t1), (1, t2), (2, t3)] {
        let mut next: State = BTreeMap::new();
        for (sig, v) in &psi {
            let mut stay = v.clone();
            stay[0] *= r.norm;
            stay[1] *= r.norm;
            let mut up = vec![Complex64::default(); 3];
            up[1] = r.norm * r.beta * v[0];
            let mut down = vec![Complex64::default(); 3];
            down[0] = r.norm * r.beta * v[1];
            for (dk, part) in [(0i8, stay), (1, up), (-1, down)] {
                let mut s = *sig;
                s[p] += dk;
                let slot = next.entry(s).or_insert_with(|| vec![Complex64::default(); 3]);
                for k in 0..3 {
                    slot[k] += part[k];
                }
            }
        }
        psi = next
            .into_iter()
            .map(|(s, v)| (s, integrate_nhh_wave(&m, &v, delay, &cfg).unwrap()))
            .collect();
    }
    let mut numeric = Complex64::default();
    for (sk, k) in &psi {
        for (sb, b) in &psi {
            let net = [sk[0] - sb[0], sk[1] - sb[1], sk[2] - sb[2]];
            if net == PhaseSignature::REPHASING.0 {
                numeric += k[1] * b[0].conj();
            }
        }
    }
    let closed = polarization_direct(PhaseSignature::REPHASING, t1, t2, t3, &r);
    assert!((numeric - closed).norm() < 1e-9 * closed.norm(), "{numeric} vs {closed}");
}

#[test]
fn nhh_density_integration_tracks_coefficients() {
    let m = model();
    let r = rates();
    let cfg = IntegratorConfig::with_step(5e-4);
    let rho = integrate_nhh(&m, &DensityMatrix::basis(3, 1), 1.0, &cfg).unwrap();
    let c = free_coeffs(1.0, &r);
    assert!((rho.get(1, 1).re - c.ee.norm_sqr()).abs() < 1e-8);
}
