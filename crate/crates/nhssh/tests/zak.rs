use approx::assert_abs_diff_eq;
use nhssh::bloch::{Band, SshModel};
use nhssh::zak::*;
use nhssh::Error;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Im Z+ at δ = 0.15, Δ = 0.1 from a 10^6-point trapezoid rule (numpy), frozen.
const IM_Z_ORACLE: f64 = -0.8280297594341275;

fn unit(_: f64) -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn closed_form_hermitian_limits() {
    let z = zak_closed_form(0.15, 0.0, Band::Plus, DEFAULT_N_QUAD).unwrap();
    assert_eq!(z.value, C64::new(FRAC_PI_2, 0.0));
    let z = zak_closed_form(-0.15, 0.0, Band::Plus, DEFAULT_N_QUAD).unwrap();
    assert_eq!(z.value, C64::new(-FRAC_PI_2, 0.0));
}

#[test]
fn closed_form_matches_oracle() {
    let z = zak_closed_form(0.15, 0.1, Band::Plus, DEFAULT_N_QUAD).unwrap();
    assert_eq!(z.value.re, FRAC_PI_2);
    assert_abs_diff_eq!(z.value.im, IM_Z_ORACLE, epsilon = 1e-13);
    let zm = zak_closed_form(0.15, 0.1, Band::Minus, DEFAULT_N_QUAD).unwrap();
    assert_eq!(zm.value, -z.value);
}

#[test]
fn closed_form_requires_real_spectrum() {
    for g in [0.15, 0.2] {
        assert!(matches!(
            zak_closed_form(0.15, g, Band::Plus, 64),
            Err(Error::SpectrumNotReal { .. })
        ));
    }
}

#[test]
fn quadrature_agrees_with_closed_form() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    for b in [Band::Plus, Band::Minus] {
        let q = zak_quadrature(&m, b, DEFAULT_N_QUAD).unwrap();
        let c = zak_closed_form(0.15, 0.1, b, DEFAULT_N_QUAD).unwrap();
        assert!((q.value - c.value).norm() < 1e-12);
    }
}

#[test]
fn wilson_hermitian_limit() {
    let m = SshModel::new(0.15, 0.0, 0.0);
    let w = zak_wilson_loop(&m, Band::Plus, 400, &WilsonOptions::default()).unwrap();
    assert_abs_diff_eq!(w.value.re, FRAC_PI_2, epsilon = 1e-6);
    assert_abs_diff_eq!(w.value.im, 0.0, epsilon = 1e-9);
}

#[test]
fn wilson_matches_closed_form() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let w = zak_wilson_loop(&m, Band::Plus, 400, &WilsonOptions::default()).unwrap();
    assert_abs_diff_eq!(w.value.re, FRAC_PI_2, epsilon = 1e-6);
    assert!(((w.value.im - IM_Z_ORACLE) / IM_Z_ORACLE).abs() < 1e-6);
    let w = zak_wilson_loop(&m, Band::Minus, 400, &WilsonOptions::default()).unwrap();
    assert_abs_diff_eq!(w.value.re, -FRAC_PI_2, epsilon = 1e-6);
    assert!(((w.value.im + IM_Z_ORACLE) / IM_Z_ORACLE).abs() < 1e-6);
}

#[test]
fn wilson_flux_independent() {
    let opts = WilsonOptions::default();
    let a = zak_wilson_loop(&SshModel::new(0.15, 0.1, 0.0), Band::Plus, 400, &opts).unwrap();
    let b = zak_wilson_loop(&SshModel::new(0.15, 0.1, 0.3), Band::Plus, 400, &opts).unwrap();
    assert!((a.value - b.value).norm() < 1e-9);
}

#[test]
fn symmetric_scheme_is_second_order() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let err = |n| (wilson_sum(&m, Band::Plus, n, WilsonScheme::Symmetric, &unit).unwrap().im - IM_Z_ORACLE).abs();
    let (e1, e2, e3) = (err(100), err(200), err(400));
    for r in [e1 / e2, e2 / e3] {
        assert!((3.6..4.4).contains(&r), "ratio {r}");
    }
}

#[test]
fn extrapolated_scheme_is_fourth_order() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let err = |n| (wilson_sum(&m, Band::Plus, n, WilsonScheme::Extrapolated, &unit).unwrap().im - IM_Z_ORACLE).abs();
    let r = err(100) / err(200);
    assert!((12.0..20.0).contains(&r), "ratio {r}");
}

#[test]
fn gauge_difference_invariance() {
    let opts = WilsonOptions::default();
    let zp = zak_wilson_loop(&SshModel::new(0.15, 0.1, 0.0), Band::Plus, 400, &opts).unwrap();
    let zn = zak_wilson_loop(&SshModel::new(-0.15, 0.1, 0.0), Band::Plus, 400, &opts).unwrap();
    assert_abs_diff_eq!(zp.value.re - zn.value.re, PI, epsilon = 1e-6);
    let rot = |_: f64| C64::from_polar(1.0, 0.7);
    for d in [0.15, -0.15] {
        let m = SshModel::new(d, 0.1, 0.0);
        let a = wilson_sum(&m, Band::Plus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        let b = wilson_sum(&m, Band::Plus, 400, WilsonScheme::Extrapolated, &rot).unwrap();
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn wilson_reports_non_convergence() {
    let m = SshModel::new(0.15, 0.14, 0.0);
    let opts = WilsonOptions {
        scheme: WilsonScheme::OneSided,
        tolerance: Some(1e-9),
    };
    assert!(matches!(
        zak_wilson_loop(&m, Band::Plus, 16, &opts),
        Err(Error::NonConvergence(_))
    ));
    assert!(zak_wilson_loop(&m, Band::Plus, 8, &WilsonOptions::default()).is_err());
}

#[test]
fn adiabatic_phase_examples() {
    let g = adiabatic_phase(&SshModel::new(0.15, 0.0, 0.0), Band::Plus, PI, DEFAULT_N_QUAD).unwrap();
    assert_abs_diff_eq!(g.gamma.re, FRAC_PI_2, epsilon = 1e-12);
    assert_abs_diff_eq!(g.gamma.im, 0.0, epsilon = 1e-14);

    let m = SshModel::new(0.15, 0.1, 0.0);
    let g = adiabatic_phase(&m, Band::Plus, PI, DEFAULT_N_QUAD).unwrap();
    let z = zak_closed_form(0.15, 0.1, Band::Plus, DEFAULT_N_QUAD).unwrap();
    assert_abs_diff_eq!(g.gamma.im, z.value.im, epsilon = 1e-8);
    assert_abs_diff_eq!(g.gamma.re, FRAC_PI_2, epsilon = 1e-12);

    let g2 = adiabatic_phase(&m, Band::Plus, 2.0 * PI, DEFAULT_N_QUAD).unwrap();
    assert!((g2.gamma - g.gamma * 2.0).norm() < 1e-10);

    let gm = adiabatic_phase(&m, Band::Minus, PI, DEFAULT_N_QUAD).unwrap();
    assert_eq!(gm.gamma, -g.gamma);
    assert_eq!((g.flux_from, g.flux_to), (0.0, PI));
}

#[test]
fn adiabatic_phase_is_k_independent() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let g0 = adiabatic_phase(&m, Band::Plus, PI, DEFAULT_N_QUAD).unwrap().gamma;
    for k in [0.3, 1.0, 2.5, 4.0, 6.0] {
        let g = adiabatic_phase_at(&m, Band::Plus, PI, k, DEFAULT_N_QUAD).unwrap().gamma;
        assert!((g - g0).norm() < 1e-10, "k = {k}");
    }
}

#[test]
fn adiabatic_phase_requires_real_spectrum() {
    let m = SshModel::new(0.15, 0.2, 0.0);
    assert!(matches!(
        adiabatic_phase(&m, Band::Plus, PI, 256),
        Err(Error::SpectrumNotReal { .. })
    ));
}

#[test]
fn xi_plus_from_oracle() {
    assert_abs_diff_eq!(xi_plus(0.15, 0.1, DEFAULT_N_QUAD).unwrap(), -IM_Z_ORACLE, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermitian_zak_is_real(delta in 0.05f64..0.9, neg in any::<bool>()) {
        let d = if neg { -delta } else { delta };
        let m = SshModel::new(d, 0.0, 0.0);
        let w = wilson_sum(&m, Band::Plus, 200, WilsonScheme::Extrapolated, &unit).unwrap();
        prop_assert!(w.im.abs() < 1e-9);
        prop_assert!((w.re - FRAC_PI_2 * d.signum()).abs() < 1e-6);
    }

    #[test]
    fn bands_are_opposite(delta in 0.1f64..0.9, frac in 0.0f64..0.8, flux in -1.0f64..1.0) {
        let m = SshModel::new(delta, frac * delta, flux);
        let p = wilson_sum(&m, Band::Plus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        let q = wilson_sum(&m, Band::Minus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        prop_assert!((p.re + q.re).abs() < 1e-6);
        prop_assert!((p.im + q.im).abs() < 1e-6);
    }

    #[test]
    fn wilson_is_flux_independent(flux in -3.0f64..3.0) {
        let a = wilson_sum(&SshModel::new(0.15, 0.1, 0.0), Band::Plus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        let b = wilson_sum(&SshModel::new(0.15, 0.1, flux), Band::Plus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn constant_gauge_rotation_leaves_wilson_unchanged(theta in -3.1f64..3.1) {
        let m = SshModel::new(0.15, 0.1, 0.0);
        let a = wilson_sum(&m, Band::Plus, 400, WilsonScheme::Extrapolated, &unit).unwrap();
        let b = wilson_sum(&m, Band::Plus, 400, WilsonScheme::Extrapolated, &|_| C64::from_polar(1.0, theta)).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }
}
