use approx::assert_abs_diff_eq;
use nhssh::bloch::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn field_at_zone_center() {
    let f = build_field(&SshModel::new(0.15, 0.1, 0.0), 0.0);
    assert!(close(f.bx, c(-1.0, 0.0), 1e-15));
    assert!(close(f.by, c(0.0, 0.0), 1e-15));
    assert!(close(f.bz, c(0.0, -0.1), 1e-15));
}

#[test]
fn field_uniform_chain() {
    let f = build_field(&SshModel::new(0.0, 0.0, 0.0), PI / 2.0);
    assert_abs_diff_eq!(f.bx.re, -(PI / 4.0).cos(), epsilon = 1e-15);
    assert_eq!(f.by.norm(), 0.0);
    assert_eq!(f.bz.norm(), 0.0);
}

#[test]
fn field_with_flux_matches_high_precision() {
    // 40-digit reference values
    let f = build_field(&SshModel::new(0.15, 0.1, PI / 3.0), 2.0 * PI / 5.0);
    assert_abs_diff_eq!(f.bx.re, 0.10452846326765347140, epsilon = 1e-15);
    assert_abs_diff_eq!(f.by.re, -0.14917828430524100054, epsilon = 1e-15);
    let p = polar_decompose(&f).unwrap();
    assert_abs_diff_eq!(p.r.re, 0.15225097747256828191, epsilon = 1e-14);
    assert_abs_diff_eq!(p.r.im, 0.0, epsilon = 1e-15);
}

#[test]
fn polar_of_zone_center() {
    let f = BlochField::new(0.0, c(-1.0, 0.0), c(0.0, 0.0), c(0.0, -0.1));
    let p = polar_decompose(&f).unwrap();
    assert_abs_diff_eq!(p.r.re, 0.99498743710661995473, epsilon = 1e-15);
    assert_abs_diff_eq!(p.r.im, 0.0, epsilon = 1e-15);
}

#[test]
fn polar_of_sigma_x() {
    let f = BlochField::new(0.0, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let p = polar_decompose(&f).unwrap();
    assert!(close(p.r, c(1.0, 0.0), 1e-15));
    assert!(close(p.cos_theta, c(0.0, 0.0), 1e-15));
    assert_eq!(p.phi_polar, 0.0);
}

#[test]
fn exceptional_point_detected() {
    let f = build_field(&SshModel::new(0.15, 0.15, 0.0), PI);
    match polar_decompose(&f) {
        Err(nhssh::Error::ExceptionalPoint { modulus, .. }) => assert!(modulus <= EPS_EP),
        other => panic!("expected ExceptionalPoint, got {other:?}"),
    }
    assert!(eigenpair(&f).is_err());
}

#[test]
fn sigma_x_eigenvectors() {
    let f = BlochField::new(0.0, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let e = eigenpair(&f).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(close(e.rho_plus[0], c(h, 0.0), 1e-15));
    assert!(close(e.rho_plus[1], c(h, 0.0), 1e-15));
}

#[test]
fn hermitian_limit_left_equals_right() {
    let m = SshModel::new(0.3, 0.0, 0.2);
    for k in k_grid::<f64>(17) {
        let f = build_field(&m, k);
        let p = polar_decompose(&f).unwrap();
        assert!(close(p.cos_theta, c(0.0, 0.0), 1e-15));
        let e = eigenpair(&f).unwrap();
        for b in [Band::Plus, Band::Minus] {
            for i in 0..2 {
                assert!(close(e.rho(b)[i], e.chi(b)[i], 1e-15));
            }
        }
    }
}

#[test]
fn half_angle_conjugation_in_real_regime() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    for k in k_grid::<f64>(64) {
        let p = polar_decompose(&build_field(&m, k)).unwrap();
        let (cc, ss) = p.half_angles();
        assert!(close(cc.conj(), ss, 1e-14), "k = {k}");
    }
}

#[test]
fn reality_examples() {
    let rep = spectrum_reality(&SshModel::new(0.15, 0.1, 0.0), 400).unwrap();
    assert_eq!(rep.class, Reality::FullyReal);
    assert_abs_diff_eq!(rep.min_margin, 0.15f64.powi(2) - 0.01, epsilon = 1e-12);
    let rep = spectrum_reality(&SshModel::new(0.15, 0.15, 0.0), 400).unwrap();
    assert_eq!(rep.class, Reality::EpOnGrid);
    let rep = spectrum_reality(&SshModel::new(0.1, 0.5, 0.0), 400).unwrap();
    assert_eq!(rep.class, Reality::Broken);
    assert!(spectrum_reality(&SshModel::new(0.1, 0.5, 0.0), 1).is_err());
}

#[test]
fn reality_is_flux_independent() {
    for flux in [0.0, 0.3, 1.1, PI] {
        for (d, g, want) in [(0.15, 0.1, Reality::FullyReal), (0.1, 0.5, Reality::Broken)] {
            let rep = spectrum_reality(&SshModel::new(d, g, flux), 256).unwrap();
            assert_eq!(rep.class, want);
        }
    }
}

#[test]
fn eigenvalues_closed_under_conjugation() {
    for (d, g) in [(0.15, 0.1), (0.1, 0.5), (-0.2, 0.3)] {
        let m = SshModel::new(d, g, 0.0);
        let mut ev = Vec::new();
        for k in k_grid::<f64>(101) {
            if let Ok(e) = eigenpair(&build_field(&m, k)) {
                ev.push(e.energy_plus);
                ev.push(e.energy_minus);
            }
        }
        let conj: Vec<C64> = ev.iter().map(|z| z.conj()).collect();
        assert!(nhssh::eigen::multiset_distance(&ev, &conj) < 1e-12);
    }
}

#[test]
fn unwrapped_polar_angle_is_continuous() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let ks = k_grid::<f64>(64);
    let path = polar_path(&m, &ks).unwrap();
    for w in path.windows(2) {
        assert!((w[1].phi_polar - w[0].phi_polar).abs() < PI);
    }
}

#[test]
fn single_precision_instantiation() {
    let m = SshModel::<f32>::new(0.15, 0.1, 0.0);
    let e = eigenpair(&build_field(&m, 0.7)).unwrap();
    let ov = braket(&e.chi_plus, &e.rho_plus);
    assert!((ov.re - 1.0).abs() < 1e-5 && ov.im.abs() < 1e-5);
}

fn apply(h: &[[C64; 2]; 2], v: &Spinor<f64>) -> Spinor<f64> {
    [h[0][0] * v[0] + h[0][1] * v[1], h[1][0] * v[0] + h[1][1] * v[1]]
}

proptest! {
    #[test]
    fn biorthogonal_invariants(
        delta in 0.05f64..0.9,
        frac in 0.0f64..0.95,
        neg in any::<bool>(),
        flux in -3.2f64..3.2,
        k in 0.0f64..6.3,
    ) {
        let delta = if neg { -delta } else { delta };
        let gain = frac * delta.abs();
        let m = SshModel::new(delta, gain, flux);
        let f = build_field(&m, k);
        let p = polar_decompose(&f).unwrap();
        prop_assert!(close(p.r * p.r, f.r_squared(), 1e-12));
        prop_assert!(close(p.cos_theta * p.r, f.bz, 1e-12));
        let (x, y, z) = p.reconstruct();
        prop_assert!(close(x, f.bx, 1e-12) && close(y, f.by, 1e-12) && close(z, f.bz, 1e-12));

        let e = eigenpair(&f).unwrap();
        let h = f.matrix();
        for b in [Band::Plus, Band::Minus] {
            let hr = apply(&h, e.rho(b));
            let lam = e.energy(b);
            let res = ((hr[0] - lam * e.rho(b)[0]).norm_sqr() + (hr[1] - lam * e.rho(b)[1]).norm_sqr()).sqrt();
            prop_assert!(res < 1e-12);
            // ⟨χ|h = λ⟨χ| is h† χ = λ* χ
            let hd = [[h[0][0].conj(), h[1][0].conj()], [h[0][1].conj(), h[1][1].conj()]];
            let hl = apply(&hd, e.chi(b));
            let res = ((hl[0] - lam.conj() * e.chi(b)[0]).norm_sqr() + (hl[1] - lam.conj() * e.chi(b)[1]).norm_sqr()).sqrt();
            prop_assert!(res < 1e-12);
        }
        prop_assert!(close(braket(&e.chi_plus, &e.rho_plus), C64::new(1.0, 0.0), 1e-12));
        prop_assert!(close(braket(&e.chi_minus, &e.rho_minus), C64::new(1.0, 0.0), 1e-12));
        prop_assert!(braket(&e.chi_plus, &e.rho_minus).norm() < 1e-12);
        prop_assert!(braket(&e.chi_minus, &e.rho_plus).norm() < 1e-12);
        // Σ |ρ⟩⟨χ| = 1
        for i in 0..2 {
            for j in 0..2 {
                let s = e.rho_plus[i] * e.chi_plus[j].conj() + e.rho_minus[i] * e.chi_minus[j].conj();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!(close(s, C64::new(want, 0.0), 1e-12));
            }
        }
        prop_assert!(p.r.re >= 0.0);
    }
}
