//! Randomized invariants of the derived rates, the kernels and the spectral
//! tooling.

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;
use twodcs::model::{angular_to_wavenumber, derive_rates, wavenumber_to_angular, ThreeLevelModel};
use twodcs::nhh::{free_coeffs, quasi_green_freq_detuned, QuasiGreenKind};
use twodcs::rf::{green_freq_detuned, green_time, GreenKind};
use twodcs::spectra::{double_fft, find_peaks, mirror_axis1, Axis, ComplexGrid2D};

fn scaled_model(s: [f64; 6]) -> ThreeLevelModel {
    let mut m = ThreeLevelModel::propanediol();
    m.rabi_ec *= s[0];
    m.gamma1 *= s[1];
    m.gamma2 *= s[2];
    m.gamma0_b *= s[3];
    m.gamma0_e *= s[4];
    m.gamma0_c *= s[5];
    m
}

fn factors() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(0.2f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_rates_are_consistent(s in factors()) {
        let m = scaled_model(s);
        let r = derive_rates(&m).unwrap();
        prop_assert_eq!(r, derive_rates(&m).unwrap());
        prop_assert!((r.gamma_eb - 0.5 * (m.gamma1 + m.gamma2 + m.gamma0_e + m.gamma0_b)).abs() < 1e-12);
        let w = r.omega_tilde_plus * r.omega_tilde_plus + 0.25 * r.gamma_ec_plus * r.gamma_ec_plus;
        prop_assert!((w - m.rabi_ec * m.rabi_ec).norm() < 1e-9 * m.rabi_ec * m.rabi_ec);
        prop_assert!((r.norm * r.norm * (1.0 + r.beta.norm_sqr()) - 1.0).abs() < 1e-14);
        prop_assert!(r.omega_tilde_minus.im == 0.0 || r.omega_tilde_minus.re == 0.0);
    }

    #[test]
    fn ground_manifold_population_is_closed(s in factors(), t in 0.0f64..50.0) {
        let r = derive_rates(&scaled_model(s)).unwrap();
        let sum = green_time(GreenKind::BbbbT, t, &r).unwrap() + green_time(GreenKind::EebbT, t, &r).unwrap();
        prop_assert!((sum.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excited_population_never_exceeds_one(s in factors(), t in 0.0f64..50.0) {
        let r = derive_rates(&scaled_model(s)).unwrap();
        let sum = green_time(GreenKind::EeeeT, t, &r).unwrap() + green_time(GreenKind::BbeeT, t, &r).unwrap();
        prop_assert!(sum.re <= 1.0 + 1e-12);
        let c = free_coeffs(t, &r);
        prop_assert!(c.ee.norm_sqr() + c.ce.norm_sqr() <= 1.0 + 1e-12);
    }

    /// With equal e–b and b–c dephasing the two detection kernels mirror
    /// each other in their imaginary parts.
    #[test]
    fn detection_kernel_mirrors_excitation_kernel(s in factors(), x in -30.0f64..30.0) {
        let mut m = scaled_model(s);
        m.gamma0_e = m.gamma0_c;
        m.gamma1 = 0.0;
        m.gamma2 = 0.0;
        let r = derive_rates(&m).unwrap();
        prop_assume!((r.gamma_eb - r.gamma_bc).abs() < 1e-12);
        let bebe = green_freq_detuned(GreenKind::BebeW, x, &r).unwrap();
        let ebeb = green_freq_detuned(GreenKind::EbebW, x, &r).unwrap();
        prop_assert!((ebeb.im + bebe.im).abs() <= 1e-12 * bebe.norm());
    }

    #[test]
    fn control_transfer_flips_sign_across_centre(s in factors(), x in 0.05f64..25.0) {
        let r = derive_rates(&scaled_model(s)).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let im = |k, x| (i * quasi_green_freq_detuned(k, x, &r).unwrap()).im;
        // Symmetric about the centre, with the sign of the control term
        // opposite to the ordinary absorption on one side.
        prop_assert!((im(QuasiGreenKind::Bcbe, x) + im(QuasiGreenKind::Bcbe, -x)).abs()
            <= 1e-9 * im(QuasiGreenKind::Bcbe, x).abs().max(1e-12));
    }

    #[test]
    fn wavenumber_round_trip(w in 1e-3f64..1e5) {
        prop_assert!((angular_to_wavenumber(wavenumber_to_angular(w)) - w).abs() <= 1e-12 * w);
    }

    #[test]
    fn mirroring_twice_is_identity(n1 in 2usize..12, n2 in 2usize..6, seed in 0u64..1000) {
        let v = Array2::from_shape_fn((n1, n2), |(i, j)| Complex64::new((seed as f64 + i as f64).sin(), j as f64));
        prop_assert_eq!(mirror_axis1(&mirror_axis1(&v)), v);
    }

    #[test]
    fn peaks_are_invariant_under_positive_scaling(
        cx in -3.0f64..3.0, cy in -3.0f64..3.0, h in -2.0f64..2.0, scale in 1e-6f64..1e6,
    ) {
        prop_assume!(h.abs() > 0.1);
        let a = Axis::centered(0.0, 5.0, 61, "x").unwrap();
        let g = twodcs::spectra::evaluate_grid::<(), _>(&a, &a, |x, y| {
            Ok(Complex64::new(1.0 / (1.0 + (x - cx).powi(2) + (y + 2.0).powi(2))
                + h / (1.0 + (x - 2.0).powi(2) + (y - cy).powi(2)), 0.0))
        }).unwrap();
        let p = find_peaks(&g, 0.3).unwrap();
        let q = find_peaks(&g.scaled(scale), 0.3).unwrap();
        prop_assert_eq!(p.len(), q.len());
        for (x, y) in p.iter().zip(&q) {
            prop_assert_eq!(x.index, y.index);
            prop_assert_eq!(x.sign, y.sign);
        }
    }

    #[test]
    fn parseval_holds(n1 in 2usize..20, n2 in 2usize..20, dt in 0.01f64..1.0, seed in 0u64..1000) {
        let values = Array2::from_shape_fn((n1, n2), |(i, j)| {
            let k = (seed as usize + 7 * i + 13 * j) as f64;
            Complex64::new((1.3 * k).sin(), (0.7 * k).cos())
        });
        let t = |n| Axis::new(0.0, dt, n, "ps").unwrap();
        let g = ComplexGrid2D::new(t(n1), t(n2), values).unwrap();
        let s = double_fft(&g, (n1, n2)).unwrap();
        let lhs: f64 = g.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt * dt;
        let rhs: f64 = s.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * s.axis1.step * s.axis2.step / (TAU * TAU);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }
}
