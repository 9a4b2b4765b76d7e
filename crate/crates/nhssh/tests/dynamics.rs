use approx::assert_abs_diff_eq;
use nhssh::bloch::{Band, SshModel};
use nhssh::dynamics::*;
use nhssh::lattice::{ssh_ring_operator, SshRingSpec};
use nhssh::zak::xi_plus;
use nhssh::Error;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ring(n: usize, d: f64, g: f64) -> SshRingSpec<f64> {
    SshRingSpec { n_cells: n, delta: d, gain: g, flux: 0.0 }
}

fn packet(center: f64, carrier: Carrier<f64>) -> WavepacketSpec<f64> {
    WavepacketSpec { center, width: 0.05, k0: PI / 4.0, carrier }
}

#[test]
fn ring_packet_starts_in_upper_band() {
    let spec = ring(500, 0.15, 0.1);
    let psi = make_gwp(&packet(250.0, Carrier::UpperBand), 1000).unwrap();
    assert_abs_diff_eq!(dirac_norm(&psi), 1.0, epsilon = 1e-14);
    let (up, _) = band_weights(&psi, &spec).unwrap();
    assert!(up > 0.99, "upper-band weight {up}");
    let dressed = make_gwp(&packet(250.0, Carrier::Dressed(SshModel::new(0.15, 0.1, 0.0))), 1000).unwrap();
    assert!(band_weights(&dressed, &spec).unwrap().0 > up);
}

#[test]
fn literal_carrier_sits_in_lower_band() {
    let spec = ring(250, 0.15, 0.1);
    let psi = make_gwp(&packet(250.0, Carrier::Literal), 500).unwrap();
    assert!(band_weights(&psi, &spec).unwrap().1 > 0.99);
}

#[test]
fn narrow_packet_is_a_single_site() {
    let wp = WavepacketSpec { center: 7.0, width: 10.0, k0: PI / 4.0, carrier: Carrier::UpperBand };
    let psi = make_gwp(&wp, 20).unwrap();
    assert_abs_diff_eq!(psi[6].norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn truncated_tails_are_reported() {
    let r = make_gwp(&packet(10.0, Carrier::UpperBand), 100);
    assert!(matches!(r, Err(Error::TailsTruncated(_))));
    assert!(make_gwp(&packet(0.0, Carrier::UpperBand), 100).is_err());
}

#[test]
fn fidelity_examples() {
    let a = make_gwp(&packet(100.0, Carrier::Literal), 200).unwrap();
    assert_abs_diff_eq!(fidelity(&a, &a).unwrap().re, 1.0, epsilon = 1e-14);
    assert!(fidelity(&a, &parity_flip(&a)).unwrap().norm() < 1e-3);
    let z = vec![C64::new(0.0, 0.0); 200];
    assert!(matches!(fidelity(&a, &z), Err(Error::ZeroNorm)));
    assert!(matches!(fidelity(&a, &a[..10]), Err(Error::DimensionMismatch(..))));
}

#[test]
fn center_of_mass_examples() {
    let mut psi = vec![C64::new(0.0, 0.0); 20];
    psi[6] = C64::new(1.0, 0.0);
    assert_abs_diff_eq!(center_of_mass(&psi, false, None).unwrap(), 7.0, epsilon = 1e-12);
    assert_abs_diff_eq!(center_of_mass(&psi, true, None).unwrap(), 7.0, epsilon = 1e-12);
    let mut psi = vec![C64::new(0.0, 0.0); 20];
    psi[2] = C64::new(0.5, 0.0);
    psi[4] = C64::new(0.0, 0.5);
    assert_abs_diff_eq!(center_of_mass(&psi, false, None).unwrap(), 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(center_of_mass(&psi, true, None).unwrap(), 4.0, epsilon = 1e-12);
    // a packet at site 1 seen from a frame just past site 20 unwraps to 21
    let mut psi = vec![C64::new(0.0, 0.0); 20];
    psi[0] = C64::new(1.0, 0.0);
    assert_abs_diff_eq!(center_of_mass(&psi, true, Some(20.5)).unwrap(), 21.0, epsilon = 1e-12);
    assert!(center_of_mass(&vec![C64::new(0.0, 0.0); 3], false, None).is_err());
}

#[test]
fn protocols_hit_their_endpoints() {
    let lin = FluxProtocol::linear(0.01);
    assert_eq!(lin.flux(0.0), 0.0);
    assert_abs_diff_eq!(lin.flux(lin.end_time()), PI, epsilon = 1e-15);
    assert_eq!(lin.flux(1e9), PI);
    let erf = FluxProtocol::erf_sweep(300.0);
    assert_abs_diff_eq!(erf.flux(0.0), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(erf.flux(300.0), PI, epsilon = 1e-14);
    assert_abs_diff_eq!(erf.flux(150.0), PI / 2.0, epsilon = 1e-14);
    let late = erf.starting_at(50.0);
    assert_eq!(late.flux(20.0), 0.0);
    assert_eq!(late.end_time(), 350.0);
    assert!(FluxProtocol::Linear { rate: -1.0, flux_start: 0.0, flux_end: 1.0, t_on: 0.0 }.validate().is_err());
}

#[test]
fn hermitian_eigenstate_is_stationary() {
    let spec = SshRingSpec { n_cells: 40, delta: 0.2, gain: 0.0, flux: 0.3 };
    let op = ssh_ring_operator(&spec).unwrap();
    let (psi, e) = bloch_eigenstate(&spec, 5, Band::Plus).unwrap();
    let h = Driven { op: &op, protocol: FluxProtocol::Constant { flux: 0.3 } };
    let opts = EvolveOptions { stride: 1000, ..EvolveOptions::default() };
    let r = evolve(&h, &psi, 100.0, 0.02, &opts).unwrap();
    let n0: f64 = dirac_norm(&psi);
    for n in &r.dirac_norm {
        assert!(((n - n0) / n0).abs() < 1e-8);
    }
    let phase = (C64::new(0.0, -1.0) * e * 100.0).exp();
    let f = inner(&psi, &r.final_state) / n0;
    assert!((f - phase).norm() < 1e-6);
}

#[test]
fn step_order_is_four() {
    let spec = ring(50, 0.15, 0.1);
    let op = ssh_ring_operator(&spec).unwrap();
    let (psi, e) = bloch_eigenstate(&spec, 7, Band::Plus).unwrap();
    let h = Driven { op: &op, protocol: FluxProtocol::Constant { flux: 0.0 } };
    let exact: Vec<C64> = psi.iter().map(|z| z * (C64::new(0.0, -1.0) * e * 100.0).exp()).collect();
    let err = |dt: f64| {
        let p = propagate(&h, &psi, 100.0, dt).unwrap();
        let d: Vec<C64> = p.iter().zip(&exact).map(|(a, b)| a - b).collect();
        (dirac_norm(&d) / dirac_norm(&exact)).sqrt()
    };
    let (a, b, c) = (err(0.04), err(0.02), err(0.01));
    assert!((12.0..20.0).contains(&(a / b)) && (12.0..20.0).contains(&(b / c)));
}

#[test]
fn oversized_step_rejected() {
    let op = ssh_ring_operator(&ring(10, 0.15, 0.1)).unwrap();
    let h = Driven { op: &op, protocol: FluxProtocol::Constant { flux: 0.0 } };
    let psi = vec![C64::new(1.0, 0.0); 20];
    let r = evolve(&h, &psi, 10.0, 0.1, &EvolveOptions::default());
    assert!(matches!(r, Err(Error::StepTooLarge(_))));
}

#[test]
fn adiabatic_following_of_a_bloch_state() {
    let spec = ring(8, 0.15, 0.1);
    let op = ssh_ring_operator(&spec).unwrap();
    let (psi, _) = bloch_eigenstate(&spec, 3, Band::Plus).unwrap();
    let beta = 1e-4;
    let p = FluxProtocol::linear(beta);
    let h = Driven { op: &op, protocol: p };
    let opts = EvolveOptions { stride: 15_000, keep_states: true, check_halving: false, ..EvolveOptions::default() };
    let r = evolve(&h, &psi, PI / beta, 0.02, &opts).unwrap();
    for (t, s) in r.times.iter().zip(&r.states) {
        let inst = bloch_eigenstate(&SshRingSpec { flux: p.flux(*t), ..spec }, 3, Band::Plus).unwrap().0;
        let f = fidelity(&inst, s).unwrap().norm();
        assert!(f > 0.999, "t = {t}: overlap {f}");
    }
}

#[test]
fn linear_sweep_norm_and_parity_flip() {
    let spec = ring(250, 0.15, 0.1);
    let op = ssh_ring_operator(&spec).unwrap();
    let psi0 = make_gwp(&packet(250.0, Carrier::Dressed(SshModel::new(0.15, 0.1, 0.0))), 500).unwrap();
    let beta = 0.005;
    let h = Driven { op: &op, protocol: FluxProtocol::linear(beta) };
    let opts = EvolveOptions { ring: true, ..EvolveOptions::default() };
    let r = evolve(&h, &psi0, PI / beta, 0.02, &opts).unwrap();
    let xi: f64 = xi_plus(0.15, 0.1, 4096).unwrap();
    let norm: f64 = *r.dirac_norm.last().unwrap();
    assert!((norm / (2.0 * xi).exp() - 1.0).abs() < 0.02, "norm {norm}");
    assert!(fidelity(&parity_flip(&psi0), &r.final_state).unwrap().norm() > 0.99);
    assert!(fidelity(&psi0, &r.final_state).unwrap().norm() < 0.05);
}

#[test]
fn erf_sweep_attenuates_for_negative_dimerization() {
    let spec = ring(250, -0.15, 0.1);
    let op = ssh_ring_operator(&spec).unwrap();
    let psi0 = make_gwp(&packet(250.0, Carrier::Dressed(SshModel::new(-0.15, 0.1, 0.0))), 500).unwrap();
    let duration = PI / 0.0015;
    let h = Driven { op: &op, protocol: FluxProtocol::erf_sweep(duration) };
    let r = evolve(&h, &psi0, duration, 0.02, &EvolveOptions { ring: true, ..EvolveOptions::default() }).unwrap();
    let xi: f64 = xi_plus(-0.15, 0.1, 4096).unwrap();
    assert!(xi < 0.0);
    let norm: f64 = *r.dirac_norm.last().unwrap();
    assert!(norm < 1.0);
    assert!((norm / (2.0 * xi).exp() - 1.0).abs() < 0.02, "norm {norm}");
}

#[test]
fn phase_ledger_of_a_sweep() {
    let m = SshModel::new(0.15, 0.1, 0.0);
    let l = PhaseLedger::linear_sweep(&m, 1.5 * PI, 0.0015, 4096).unwrap();
    assert_abs_diff_eq!(l.xi, xi_plus(0.15, 0.1, 4096).unwrap(), epsilon = 1e-10);
    assert_abs_diff_eq!(l.omega, l.dynamic + PI / 2.0, epsilon = 1e-9);
    // the dynamic phase only depends on the band average of ε, not on k_c
    let l2 = PhaseLedger::linear_sweep(&m, 0.4, 0.0015, 4096).unwrap();
    assert_abs_diff_eq!(l.dynamic, l2.dynamic, epsilon = 1e-8);
}

#[test]
fn trajectory_prediction() {
    let spec = ring(250, 0.15, 0.1);
    let fl: Vec<f64> = (0..=200).map(|i| PI * i as f64 / 200.0).collect();
    let a = predict_trajectory(&spec, 1.5 * PI, 0.01, 250.0, &fl);
    let b = predict_trajectory(&spec, 1.5 * PI, 0.02, 250.0, &fl);
    let amp = |x: &[f64]| x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    assert_abs_diff_eq!(amp(&a), 2.0 * amp(&b), epsilon = 1e-9);
    assert_abs_diff_eq!(*a.last().unwrap(), 250.0, epsilon = 1e-9);
    // moves right first
    assert!(a[10] > 250.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_has_period_pi_in_flux(k in 0.0f64..6.3, phi in -3.0f64..3.0) {
        let m = SshModel::new(0.15, 0.1, phi);
        let e1 = m.energy(k);
        let e2 = m.with_flux(phi + PI).energy(k);
        prop_assert!((e1 - e2).norm() < 1e-12);
    }

    #[test]
    fn erf_protocol_is_monotone(t1 in 0.0f64..400.0, t2 in 0.0f64..400.0, s in 0.005f64..0.1) {
        let p = FluxProtocol::Erf { scale: s, center: 150.0, duration: 300.0, flux_start: 0.0, flux_end: PI, t_on: 20.0 };
        let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(p.flux(a) <= p.flux(b) + 1e-15);
        prop_assert!(p.flux(a) >= -1e-15 && p.flux(b) <= PI + 1e-14);
    }
}

#[test]
fn single_precision_pipeline() {
    let xi = xi_plus(0.15f32, 0.1, 4096).unwrap();
    assert!((xi - 0.828_029_76).abs() < 1e-4);
    let spec = SshRingSpec::<f32> { n_cells: 20, delta: 0.15, gain: 0.1, flux: 0.0 };
    let op = ssh_ring_operator(&spec).unwrap();
    let (psi, e) = bloch_eigenstate(&spec, 3, Band::Plus).unwrap();
    let h = Driven { op: &op, protocol: FluxProtocol::Constant { flux: 0.0f32 } };
    let p = propagate(&h, &psi, 10.0, 0.02).unwrap();
    let f = inner(&psi, &p) / dirac_norm(&psi);
    let want = (num_complex::Complex32::new(0.0, -1.0) * e * 10.0).exp();
    assert!((f - want).norm() < 1e-4);
}
