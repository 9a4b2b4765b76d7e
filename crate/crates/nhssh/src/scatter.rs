//! Wavepacket scattering through the flux-threaded interferometer.

use num_complex::Complex;

use crate::bloch::SshModel;
use crate::dynamics::{
    check_step, dirac_norm, fidelity, make_gwp, Driven, FluxProtocol, Rk4, StateVector,
    WavepacketSpec,
};
use crate::error::{Error, Result};
use crate::lattice::{arm_virtual_amplitudes, network_operator, FluxOperator, NetworkLayout, NetworkSpec};
use crate::real::{re, Real};

/// Margin applied to arrival-time estimates.
pub const TIMING_MARGIN: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpulseTiming<T> {
    /// The ramp starts at `t = 0` and must finish before the packet reaches the splitter.
    BeforeArrival,
    /// The ramp starts once `prob_ring > ring_threshold` and the packet sits
    /// where its predicted excursion stays inside the arms.
    DuringTransit { ring_threshold: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterScenario<T> {
    pub network: NetworkSpec<T>,
    /// Packet on lead A; `center` is a site index in A.
    pub wavepacket: WavepacketSpec<T>,
    /// Ramp shape; its start time is set by `timing`.
    pub protocol: FluxProtocol<T>,
    pub timing: ImpulseTiming<T>,
    /// Defaults to an estimate of when the packet has left the ring.
    pub total_time: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterOptions<T> {
    pub stride: usize,
    pub check_halving: bool,
    pub tolerance: T,
    /// If set, diagonalize the network at the initial and final flux and fail
    /// when `max|Im ε|` exceeds this bound.
    pub max_imag_bound: Option<T>,
}

impl<T: Real> Default for ScatterOptions<T> {
    fn default() -> Self {
        Self {
            stride: 50,
            check_halving: true,
            tolerance: T::lit(1e-6),
            max_imag_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterReport<T> {
    pub times: Vec<T>,
    pub flux: Vec<T>,
    pub prob_a: Vec<T>,
    pub prob_ring: Vec<T>,
    pub prob_d: Vec<T>,
    pub virtual_a: Vec<T>,
    pub virtual_b: Vec<T>,
    pub dirac_norm: Vec<T>,
    /// Final `prob_D`.
    pub transmission: T,
    /// Final `prob_ring`.
    pub confinement: T,
    /// Final `prob_A`.
    pub reflection: T,
    pub impulse_start: T,
    pub impulse_end: T,
    /// Arm clone fidelity when the impulse starts (during-transit runs).
    pub clone_fidelity: Option<T>,
    /// `⟨B1|B2⟩ / (‖B1‖‖B2‖)` when the impulse ends.
    pub arm_overlap: Option<Complex<T>>,
    /// `‖B1‖² / ‖B2‖²` when the impulse ends.
    pub arm_norm_ratio: Option<T>,
    pub max_imag_energy: Option<T>,
    pub halving_change: Option<T>,
    pub final_state: StateVector<T>,
}

/// Per-region Dirac probabilities `(A, ring, D)` normalized by the total, and the total.
pub fn region_probabilities<T: Real>(layout: &NetworkLayout, psi: &[Complex<T>]) -> (T, T, T, T) {
    let a = dirac_norm(&psi[layout.a.clone()]);
    let r = dirac_norm(&psi[layout.ring()]);
    let d = dirac_norm(&psi[layout.d.clone()]);
    let t = a + r + d;
    (a / t, r / t, d / t, t)
}

/// Weights of the arm content on virtual chains a and b, normalized to sum 1.
pub fn virtual_weights<T: Real>(layout: &NetworkLayout, flux: T, psi: &[Complex<T>]) -> (T, T) {
    let (a, b) = arm_virtual_amplitudes(layout, flux, psi);
    let (wa, wb) = (dirac_norm(&a), dirac_norm(&b));
    let s = wa + wb;
    if s > T::zero() {
        (wa / s, wb / s)
    } else {
        (T::zero(), T::zero())
    }
}

fn arm_center<T: Real>(layout: &NetworkLayout, psi: &[Complex<T>]) -> T {
    let (mut w, mut x) = (T::zero(), T::zero());
    for j in 0..layout.b1.len() {
        let p = psi[layout.b1.start + j].norm_sqr() + psi[layout.b2.start + j].norm_sqr();
        w += p;
        x += p * T::from_usize_(j + 1);
    }
    x / w
}

/// Upper-band group velocity at `k = π/2`, in sites per unit time.
pub fn site_velocity<T: Real>(spec: &NetworkSpec<T>) -> T {
    let m = SshModel::new(spec.delta, spec.gain, T::zero());
    T::lit(2.0) * m.group_velocity(T::FRAC_PI_2()).abs()
}

/// `t_arrive = (2N_A − N_c)/(2v)` with `v` in cells per unit time.
pub fn arrival_time<T: Real>(s: &ScatterScenario<T>) -> T {
    (T::from_usize_(2 * s.network.n_a) - s.wavepacket.center) / site_velocity(&s.network)
}

/// Predicted extreme excursions `(x_lo, x_hi)` in sites for a linear ramp at `rate`.
pub fn excursion<T: Real>(spec: &NetworkSpec<T>, k_c: T, rate: T) -> (T, T) {
    let m = SshModel::new(spec.delta, spec.gain, T::zero());
    let e0 = m.energy(k_c).re;
    let n = 2000;
    let (mut lo, mut hi) = (T::zero(), T::zero());
    for i in 0..=n {
        let phi = T::PI() * T::from_usize_(i) / T::from_usize_(n);
        let x = (m.with_flux(phi).energy(k_c).re - e0) / rate;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

/// `(sinh²ξ+, cosh²ξ+) / (sinh²ξ+ + cosh²ξ+)`: fractions leaving through D and staying in the ring.
pub fn confinement_prediction<T: Real>(delta: T, gain: T, n_quad: usize) -> Result<(T, T)> {
    let xi = crate::zak::xi_plus(delta, gain, n_quad)?;
    let (s, c) = (xi.sinh().powi(2), xi.cosh().powi(2));
    Ok((s / (s + c), c / (s + c)))
}

struct Plan<T> {
    protocol: FluxProtocol<T>,
    total: T,
}

fn ramp_duration<T: Real>(p: &FluxProtocol<T>) -> T {
    p.starting_at(T::zero()).end_time()
}

/// Time for the packet, starting at arm position `from`, to clear the arm completely.
fn exit_time<T: Real>(s: &ScatterScenario<T>, from: T) -> T {
    let lb = T::from_usize_(2 * s.network.n_b);
    let tail = T::lit(3.0) / s.wavepacket.width;
    T::lit(TIMING_MARGIN) * (lb - from + tail) / site_velocity(&s.network)
}

struct Run<T> {
    report: ScatterReport<T>,
    protocol: FluxProtocol<T>,
    total: T,
}

fn simulate<T: Real>(
    s: &ScatterScenario<T>,
    op: &FluxOperator<T>,
    psi0: &[Complex<T>],
    dt: T,
    stride: usize,
    fixed: Option<Plan<T>>,
) -> Result<Run<T>> {
    let net = &s.network;
    let layout = net.layout();
    let lb = T::from_usize_(layout.b1.len());
    let ramp = ramp_duration(&s.protocol);
    let k_c = s.wavepacket.cell_momentum();

    // Fixed plans come from an earlier run; otherwise start times are decided here.
    let (mut protocol, mut total, mut started) = match &fixed {
        Some(p) => (p.protocol, Some(p.total), true),
        None => match s.timing {
            ImpulseTiming::BeforeArrival => {
                let p = s.protocol.starting_at(T::zero());
                let t_arr = arrival_time(s);
                if T::lit(TIMING_MARGIN) * p.end_time() > t_arr {
                    return Err(Error::ProtocolTimingInvalid(format!(
                        "ramp ends at {} but the packet arrives at {} (margin {})",
                        p.end_time(),
                        t_arr,
                        TIMING_MARGIN
                    )));
                }
                let dist = T::from_usize_(2 * net.n_a + 2 * net.n_b) - s.wavepacket.center
                    + T::lit(3.0) / s.wavepacket.width;
                let t = s.total_time.unwrap_or(T::lit(TIMING_MARGIN) * dist / site_velocity(net));
                (p, Some(t), true)
            }
            ImpulseTiming::DuringTransit { .. } => {
                // Hold the initial flux until the trigger fires.
                let hold = FluxProtocol::Constant {
                    flux: s.protocol.flux(s.protocol.start_time()),
                };
                (hold, s.total_time, false)
            }
        },
    };

    // Arm position at which the predicted excursion window is centred.
    let (target, fits) = match (s.timing, s.protocol) {
        (ImpulseTiming::DuringTransit { .. }, FluxProtocol::Linear { rate, .. }) => {
            let (lo, hi) = excursion(net, k_c, rate);
            let span = hi - lo + T::lit(4.0) / s.wavepacket.width;
            ((T::one() + lb) / T::lit(2.0) - (lo + hi) / T::lit(2.0), span <= lb)
        }
        (ImpulseTiming::DuringTransit { .. }, _) => ((T::one() + lb) / T::lit(2.0), true),
        _ => (T::zero(), true),
    };
    if !fits {
        return Err(Error::ProtocolTimingInvalid(
            "predicted excursion plus packet width exceeds the arm length".into(),
        ));
    }
    let threshold = match s.timing {
        ImpulseTiming::DuringTransit { ring_threshold } => ring_threshold,
        _ => T::one(),
    };

    let mut psi = psi0.to_vec();
    let mut rk = Rk4::new(psi.len());
    let mut rep = ScatterReport {
        times: Vec::new(),
        flux: Vec::new(),
        prob_a: Vec::new(),
        prob_ring: Vec::new(),
        prob_d: Vec::new(),
        virtual_a: Vec::new(),
        virtual_b: Vec::new(),
        dirac_norm: Vec::new(),
        transmission: T::zero(),
        confinement: T::zero(),
        reflection: T::zero(),
        impulse_start: protocol.start_time(),
        impulse_end: protocol.end_time(),
        clone_fidelity: None,
        arm_overlap: None,
        arm_norm_ratio: None,
        max_imag_energy: None,
        halving_change: None,
        final_state: Vec::new(),
    };
    let record = |rep: &mut ScatterReport<T>, t: T, phi: T, psi: &[Complex<T>]| {
        let (pa, pr, pd, n) = region_probabilities(&layout, psi);
        let (va, vb) = virtual_weights(&layout, phi, psi);
        rep.times.push(t);
        rep.flux.push(phi);
        rep.prob_a.push(pa);
        rep.prob_ring.push(pr);
        rep.prob_d.push(pd);
        rep.virtual_a.push(va);
        rep.virtual_b.push(vb);
        rep.dirac_norm.push(n);
        pr
    };
    let arms = |psi: &[Complex<T>]| -> (StateVector<T>, StateVector<T>) {
        (psi[layout.b1.clone()].to_vec(), psi[layout.b2.clone()].to_vec())
    };

    // A hard ceiling so a packet that never triggers the impulse cannot run forever.
    let ceiling = T::lit(TIMING_MARGIN)
        * (T::from_usize_(layout.dim()) / site_velocity(net) + ramp)
        + T::lit(100.0);
    let mut step = 0usize;
    let mut t = T::zero();
    let mut overlap_taken = false;
    record(&mut rep, t, protocol.flux(t), &psi);
    loop {
        if let Some(tt) = total {
            if t >= tt - dt * T::lit(0.5) {
                break;
            }
        }
        if t > ceiling && !started {
            return Err(Error::ProtocolTimingInvalid(format!(
                "packet never reached prob_ring > {} inside the arms",
                threshold
            )));
        }
        let h = Driven { op, protocol };
        rk.step(&h, t, dt, &mut psi);
        step += 1;
        t = T::from_usize_(step) * dt;
        if started && !overlap_taken && t >= protocol.end_time() {
            let (up, lo) = arms(&psi);
            rep.arm_overlap = fidelity(&up, &lo).ok();
            rep.arm_norm_ratio = Some(dirac_norm(&up) / dirac_norm(&lo));
            overlap_taken = true;
        }
        if step % stride == 0 {
            let pr = record(&mut rep, t, protocol.flux(t), &psi);
            if !started && pr > threshold && arm_center(&layout, &psi) >= target {
                protocol = s.protocol.starting_at(t);
                started = true;
                let (up, lo) = arms(&psi);
                rep.clone_fidelity = fidelity(&up, &lo).ok().map(|z| z.norm());
                rep.impulse_start = t;
                rep.impulse_end = protocol.end_time();
                if total.is_none() {
                    total = Some(protocol.end_time() + exit_time(s, target));
                }
            }
        }
    }
    if step % stride != 0 {
        record(&mut rep, t, protocol.flux(t), &psi);
    }
    let last = rep.times.len() - 1;
    rep.transmission = rep.prob_d[last];
    rep.confinement = rep.prob_ring[last];
    rep.reflection = rep.prob_a[last];
    rep.final_state = psi;
    // The time actually reached, so a replay at dt/2 ends on the same instant.
    let total = t;
    Ok(Run {
        report: rep,
        protocol,
        total,
    })
}

/// Runs a scenario without the eigenvalue diagnostic.
pub fn run_scenario_unchecked<T: Real>(
    s: &ScatterScenario<T>,
    dt: T,
    opts: &ScatterOptions<T>,
) -> Result<ScatterReport<T>> {
    s.protocol.validate()?;
    let op = network_operator(&s.network)?;
    check_step(dt, op.spectral_bound())?;
    let mut psi0 = vec![re(T::zero()); op.dim()];
    let layout = s.network.layout();
    let g = make_gwp(&s.wavepacket, layout.a.len())?;
    psi0[layout.a.clone()].copy_from_slice(&g);
    let stride = opts.stride.max(1);
    let run = simulate(s, &op, &psi0, dt, stride, None)?;
    let mut report = run.report;
    if opts.check_halving {
        let plan = Plan {
            protocol: run.protocol,
            total: run.total,
        };
        let fine = simulate(s, &op, &psi0, dt / T::lit(2.0), usize::MAX, Some(plan))?;
        let a = &report.final_state;
        let b = &fine.report.final_state;
        let diff: StateVector<T> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
        let change = (dirac_norm(&diff) / dirac_norm(b)).sqrt();
        report.halving_change = Some(change);
        if !(change < opts.tolerance) {
            return Err(Error::StepTooLarge(format!(
                "halving dt changed the final state by {:e} (relative)",
                change.to_f64_()
            )));
        }
    }
    Ok(report)
}

/// `max|Im ε|` of the network at its configured flux.
pub fn network_max_imag<T: Real>(spec: &NetworkSpec<T>) -> Result<T> {
    let h = crate::lattice::build_network(spec)?;
    let ev = crate::eigen::spectrum(&h)?;
    Ok(crate::eigen::max_imag(&ev))
}

/// Evolves the packet through the network, optionally after checking the
/// network spectrum at flux 0 and at the protocol's final flux.
pub fn run_scenario<T: Real>(
    s: &ScatterScenario<T>,
    dt: T,
    opts: &ScatterOptions<T>,
) -> Result<ScatterReport<T>> {
    let mut diag = None;
    if let Some(bound) = opts.max_imag_bound {
        let end = s.protocol.flux(s.protocol.end_time());
        let m0 = network_max_imag(&NetworkSpec { flux: T::zero(), ..s.network })?;
        let m1 = network_max_imag(&NetworkSpec { flux: end, ..s.network })?;
        let m = if m0 > m1 { m0 } else { m1 };
        if m > bound {
            return Err(Error::SpectrumNotReal {
                delta: s.network.delta.to_f64_(),
                gain: s.network.gain.to_f64_(),
            });
        }
        diag = Some(m);
    }
    let mut r = run_scenario_unchecked(s, dt, opts)?;
    r.max_imag_energy = diag;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCheck<T> {
    pub upper: StateVector<T>,
    pub lower: StateVector<T>,
    pub clone_fidelity: T,
    /// `⟨upper|lower⟩ / (‖upper‖‖lower‖)`.
    pub overlap: Complex<T>,
}

/// Arm contents at time `t`, with B1 and B2 identified site by site.
pub fn split_check<T: Real>(s: &ScatterScenario<T>, t: T, dt: T) -> Result<SplitCheck<T>> {
    let opts = ScatterOptions {
        check_halving: false,
        ..ScatterOptions::default()
    };
    let sc = ScatterScenario {
        total_time: Some(t),
        ..*s
    };
    let r = run_scenario_unchecked(&sc, dt, &opts)?;
    let layout = s.network.layout();
    let pr = *r.prob_ring.last().expect("at least one frame");
    if !(pr > T::lit(0.99)) {
        return Err(Error::PacketNotInRing(pr.to_f64_()));
    }
    let upper = r.final_state[layout.b1.clone()].to_vec();
    let lower = r.final_state[layout.b2.clone()].to_vec();
    let overlap = fidelity(&upper, &lower)?;
    Ok(SplitCheck {
        clone_fidelity: overlap.norm(),
        overlap,
        upper,
        lower,
    })
}
