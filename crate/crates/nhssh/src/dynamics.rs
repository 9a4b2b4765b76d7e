//! Non-unitary wavepacket dynamics under time-dependent flux.

use num_complex::Complex;

use crate::bloch::{build_field, eigenpair, Band, SshModel};
use crate::error::{Error, Result};
use crate::lattice::{FluxOperator, SshRingSpec};
use crate::real::{cis, re, trapezoid, Real};

pub type StateVector<T> = Vec<Complex<T>>;

/// Upper limit on `dt · max|ε|` for the fixed-step integrator.
pub const MAX_DT_BOUND: f64 = 0.05;
pub const DEFAULT_DT: f64 = 0.02;

/// Dirac norm `⟨ψ|ψ⟩`.
pub fn dirac_norm<T: Real>(psi: &[Complex<T>]) -> T {
    psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
}

pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(re(T::zero()), |s, (x, y)| s + x.conj() * *y)
}

pub fn normalize<T: Real>(psi: &mut [Complex<T>]) -> Result<()> {
    let n = dirac_norm(psi).sqrt();
    if !(n > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    for z in psi.iter_mut() {
        *z = *z / n;
    }
    Ok(())
}

/// `⟨a|b⟩ / (‖a‖ ‖b‖)`.
pub fn fidelity<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<Complex<T>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let na = dirac_norm(a).sqrt();
    let nb = dirac_norm(b).sqrt();
    if !(na > T::zero()) || !(nb > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok(inner(a, b) / (na * nb))
}

/// Multiplies site `j` (1-based) by `(−1)^j`.
pub fn parity_flip<T: Real>(psi: &[Complex<T>]) -> StateVector<T> {
    psi.iter()
        .enumerate()
        .map(|(i, &z)| if i % 2 == 0 { -z } else { z })
        .collect()
}

/// How the plane-wave factor of a Gaussian packet is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Carrier<T> {
    /// `e^{i k₀ l}` as written. For `0 < k₀ < π/2` this sits in the lower band.
    Literal,
    /// `e^{i(π − k₀) l}`: the upper-band state with the same group velocity.
    UpperBand,
    /// Upper-band carrier times the Bloch spinor `ρ+` at cell momentum `2(π − k₀)`.
    Dressed(SshModel<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec<T> {
    /// `N_c`, a 1-based site index within the segment.
    pub center: T,
    /// `α` in `e^{−α²(l − N_c)²}`.
    pub width: T,
    pub k0: T,
    pub carrier: Carrier<T>,
}

impl<T: Real> WavepacketSpec<T> {
    /// Site momentum of the carrier actually used.
    pub fn site_momentum(&self) -> T {
        match self.carrier {
            Carrier::Literal => self.k0,
            _ => T::PI() - self.k0,
        }
    }

    /// Cell momentum `k_c` of the packet (two sites per cell).
    pub fn cell_momentum(&self) -> T {
        T::lit(2.0) * self.site_momentum()
    }
}

/// Amplitude threshold at the segment boundary above which a packet counts as truncated.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Gaussian packet `e^{−α²(l−N_c)²}` times the chosen carrier on sites `1..=len`,
/// Dirac-normalized.
pub fn make_gwp<T: Real>(spec: &WavepacketSpec<T>, len: usize) -> Result<StateVector<T>> {
    if !(spec.width > T::zero()) {
        return Err(Error::InvalidParameter("wavepacket width must be > 0".into()));
    }
    if len == 0 || spec.center < T::one() || spec.center > T::from_usize_(len) {
        return Err(Error::InvalidParameter("wavepacket center outside the segment".into()));
    }
    let q = spec.site_momentum();
    let spinor = match spec.carrier {
        Carrier::Dressed(model) => {
            let e = eigenpair(&build_field(&model, T::lit(2.0) * q))?;
            Some(e.rho_plus)
        }
        _ => None,
    };
    let a2 = spec.width * spec.width;
    let mut psi: StateVector<T> = (1..=len)
        .map(|l| {
            let x = T::from_usize_(l) - spec.center;
            let env = (-a2 * x * x).exp();
            let w = cis(q * T::from_usize_(l)) * env;
            match spinor {
                Some(s) => w * s[if l % 2 == 1 { 0 } else { 1 }],
                None => w,
            }
        })
        .collect();
    normalize(&mut psi)?;
    let tail = psi[0].norm().max(psi[len - 1].norm());
    if tail >= T::lit(TAIL_LIMIT) {
        return Err(Error::TailsTruncated(tail.to_f64_()));
    }
    Ok(psi)
}

/// Right Bloch eigenstate of the ring at `k = 2πn/N` and its energy.
pub fn bloch_eigenstate<T: Real>(
    spec: &SshRingSpec<T>,
    n: usize,
    band: Band,
) -> Result<(StateVector<T>, Complex<T>)> {
    spec.validate()?;
    let cells = spec.n_cells;
    let k = T::lit(2.0) * T::PI() * T::from_usize_(n % cells) / T::from_usize_(cells);
    let model = SshModel::new(spec.delta, spec.gain, spec.flux);
    let e = eigenpair(&build_field(&model, k))?;
    let rho = e.rho(band);
    let mut psi = Vec::with_capacity(2 * cells);
    for m in 1..=cells {
        let m = T::from_usize_(m);
        psi.push(rho[0] * cis(k * (m - T::lit(0.5))));
        psi.push(rho[1] * cis(k * m));
    }
    Ok((psi, e.energy(band)))
}

/// Biorthogonal band populations `(Σ_k |⟨χ+|ψ_k⟩|², Σ_k |⟨χ−|ψ_k⟩|²)`, normalized to sum 1.
pub fn band_weights<T: Real>(psi: &[Complex<T>], spec: &SshRingSpec<T>) -> Result<(T, T)> {
    let cells = spec.n_cells;
    if psi.len() != 2 * cells {
        return Err(Error::DimensionMismatch(psi.len(), 2 * cells));
    }
    let model = SshModel::new(spec.delta, spec.gain, spec.flux);
    let (mut wp, mut wm) = (T::zero(), T::zero());
    for n in 0..cells {
        let k = T::lit(2.0) * T::PI() * T::from_usize_(n) / T::from_usize_(cells);
        let (mut a, mut b) = (re(T::zero()), re(T::zero()));
        for m in 1..=cells {
            let mf = T::from_usize_(m);
            a += psi[2 * m - 2] * cis(-k * (mf - T::lit(0.5)));
            b += psi[2 * m - 1] * cis(-k * mf);
        }
        let e = eigenpair(&build_field(&model, k))?;
        let v = [a, b];
        wp += crate::bloch::braket(&e.chi_plus, &v).norm_sqr();
        wm += crate::bloch::braket(&e.chi_minus, &v).norm_sqr();
    }
    let s = wp + wm;
    if !(s > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok((wp / s, wm / s))
}

/// Flux as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxProtocol<T> {
    Constant {
        flux: T,
    },
    /// `φ = flux_start + rate (t − t_on)`, held at the endpoints outside the ramp.
    Linear {
        rate: T,
        flux_start: T,
        flux_end: T,
        t_on: T,
    },
    /// Error-function ramp over `[t_on, t_on + duration]`, rescaled so the
    /// endpoints are hit exactly.
    Erf {
        scale: T,
        center: T,
        duration: T,
        flux_start: T,
        flux_end: T,
        t_on: T,
    },
}

impl<T: Real> FluxProtocol<T> {
    /// `φ = βt` from 0 to π.
    pub fn linear(rate: T) -> Self {
        FluxProtocol::Linear {
            rate,
            flux_start: T::zero(),
            flux_end: T::PI(),
            t_on: T::zero(),
        }
    }

    /// Erf ramp from 0 to π centred in `[0, duration]` with `s = 4/duration`.
    pub fn erf_sweep(duration: T) -> Self {
        FluxProtocol::Erf {
            scale: T::lit(4.0) / duration,
            center: duration / T::lit(2.0),
            duration,
            flux_start: T::zero(),
            flux_end: T::PI(),
            t_on: T::zero(),
        }
    }

    pub fn starting_at(self, t: T) -> Self {
        match self {
            FluxProtocol::Constant { .. } => self,
            FluxProtocol::Linear { rate, flux_start, flux_end, .. } => FluxProtocol::Linear {
                rate,
                flux_start,
                flux_end,
                t_on: t,
            },
            FluxProtocol::Erf { scale, center, duration, flux_start, flux_end, .. } => {
                FluxProtocol::Erf {
                    scale,
                    center,
                    duration,
                    flux_start,
                    flux_end,
                    t_on: t,
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match *self {
            FluxProtocol::Constant { flux } if !flux.is_finite() => bad("flux not finite"),
            FluxProtocol::Linear { rate, flux_start, flux_end, .. } => {
                if !(rate > T::zero()) || !(flux_end >= flux_start) {
                    bad("linear protocol needs rate > 0 and flux_end >= flux_start")
                } else {
                    Ok(())
                }
            }
            FluxProtocol::Erf { scale, duration, flux_start, flux_end, .. } => {
                if !(scale > T::zero()) || !(duration > T::zero()) || !(flux_end >= flux_start) {
                    bad("erf protocol needs scale, duration > 0 and flux_end >= flux_start")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn flux(&self, t: T) -> T {
        match *self {
            FluxProtocol::Constant { flux } => flux,
            FluxProtocol::Linear { rate, flux_start, flux_end, t_on } => {
                let tau = (t - t_on).max(T::zero());
                (flux_start + rate * tau).min(flux_end)
            }
            FluxProtocol::Erf { scale, center, duration, flux_start, flux_end, t_on } => {
                let tau = (t - t_on).max(T::zero()).min(duration);
                let lo = (-scale * center).error_function();
                let hi = (scale * (duration - center)).error_function();
                let u = ((scale * (tau - center)).error_function() - lo) / (hi - lo);
                flux_start + (flux_end - flux_start) * u
            }
        }
    }

    /// Time at which the final flux is reached.
    pub fn end_time(&self) -> T {
        match *self {
            FluxProtocol::Constant { .. } => T::zero(),
            FluxProtocol::Linear { rate, flux_start, flux_end, t_on } => {
                t_on + (flux_end - flux_start) / rate
            }
            FluxProtocol::Erf { duration, t_on, .. } => t_on + duration,
        }
    }

    pub fn start_time(&self) -> T {
        match *self {
            FluxProtocol::Constant { .. } => T::zero(),
            FluxProtocol::Linear { t_on, .. } | FluxProtocol::Erf { t_on, .. } => t_on,
        }
    }
}

/// A Hamiltonian `H(t)` that can be applied to a state.
pub trait TimeDependentHamiltonian<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, t: T, psi: &[Complex<T>], out: &mut [Complex<T>]);
    /// Upper bound on `max|ε|` over all times.
    fn spectral_bound(&self) -> T;
}

/// A flux operator driven by a protocol.
#[derive(Debug, Clone, Copy)]
pub struct Driven<'a, T> {
    pub op: &'a FluxOperator<T>,
    pub protocol: FluxProtocol<T>,
}

impl<T: Real> TimeDependentHamiltonian<T> for Driven<'_, T> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, t: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        self.op.apply(self.protocol.flux(t), psi, out)
    }

    fn spectral_bound(&self) -> T {
        self.op.spectral_bound()
    }
}

/// Classical fourth-order Runge–Kutta for `i ∂ψ/∂t = H(t) ψ` with reusable buffers.
pub struct Rk4<T> {
    k: [Vec<Complex<T>>; 4],
    tmp: Vec<Complex<T>>,
}

impl<T: Real> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![re(T::zero()); dim];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    pub fn step<H: TimeDependentHamiltonian<T> + ?Sized>(
        &mut self,
        h: &H,
        t: T,
        dt: T,
        psi: &mut [Complex<T>],
    ) {
        let mi = Complex::new(T::zero(), -T::one());
        let half = dt / T::lit(2.0);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        h.apply(t, psi, k1);
        k1.iter_mut().for_each(|z| *z = *z * mi);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *x = *p + *k * half;
        }
        h.apply(t + half, tmp, k2);
        k2.iter_mut().for_each(|z| *z = *z * mi);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *x = *p + *k * half;
        }
        h.apply(t + half, tmp, k3);
        k3.iter_mut().for_each(|z| *z = *z * mi);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *x = *p + *k * dt;
        }
        h.apply(t + dt, tmp, k4);
        k4.iter_mut().for_each(|z| *z = *z * mi);

        let w = dt / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..psi.len() {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * w;
        }
    }
}

/// Fails with `StepTooLarge` when `dt · bound` exceeds [`MAX_DT_BOUND`].
pub fn check_step<T: Real>(dt: T, bound: T) -> Result<()> {
    if !(dt > T::zero()) || dt * bound > T::lit(MAX_DT_BOUND) {
        return Err(Error::StepTooLarge(format!(
            "dt = {} with spectral bound {} exceeds dt*max|E| <= {}",
            dt, bound, MAX_DT_BOUND
        )));
    }
    Ok(())
}

/// Integrates from 0 to `t_total` with `ceil(t_total/dt)` equal steps; returns the final state.
pub fn propagate<T: Real, H: TimeDependentHamiltonian<T> + ?Sized>(
    h: &H,
    psi0: &[Complex<T>],
    t_total: T,
    dt: T,
) -> Result<StateVector<T>> {
    let (n, h_dt) = step_count(t_total, dt)?;
    let mut psi = psi0.to_vec();
    let mut rk = Rk4::new(psi.len());
    for s in 0..n {
        rk.step(h, T::from_usize_(s) * h_dt, h_dt, &mut psi);
    }
    Ok(psi)
}

fn step_count<T: Real>(t_total: T, dt: T) -> Result<(usize, T)> {
    if !(t_total >= T::zero()) || !(dt > T::zero()) {
        return Err(Error::InvalidParameter("need t_total >= 0 and dt > 0".into()));
    }
    let n = (t_total / dt).ceil().to_usize().unwrap_or(0).max(1);
    Ok((n, t_total / T::from_usize_(n)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    /// Record a frame every `stride` steps (the final state is always recorded).
    pub stride: usize,
    /// Periodic geometry for the centre of mass.
    pub ring: bool,
    pub keep_states: bool,
    /// Re-run at `dt/2` and compare final states.
    pub check_halving: bool,
    pub tolerance: T,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            stride: 50,
            ring: false,
            keep_states: false,
            check_halving: true,
            tolerance: T::lit(1e-6),
        }
    }
}

/// Dynamic phase, adiabatic phase and amplification exponent of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLedger<T> {
    /// `α+ = −∫ ε dt` over the sweep.
    pub dynamic: T,
    pub gamma: Complex<T>,
    /// `ξ+ = −Im γ+`.
    pub xi: T,
    /// `Ω+ = α+ + Re γ+`.
    pub omega: T,
}

impl<T: Real> PhaseLedger<T> {
    /// Ledger for a linear sweep `φ: 0 → π` at rate `beta` of a packet at cell momentum `k_c`.
    pub fn linear_sweep(model: &SshModel<T>, k_c: T, beta: T, n_quad: usize) -> Result<Self> {
        let m0 = model.with_flux(T::zero());
        let gamma = crate::zak::adiabatic_phase_at(&m0, Band::Plus, T::PI(), k_c, n_quad)?.gamma;
        let e_int = trapezoid(T::zero(), T::PI(), n_quad, |phi| re(m0.with_flux(phi).energy(k_c).re)).re;
        let dynamic = -e_int / beta;
        Ok(Self {
            dynamic,
            gamma,
            xi: -gamma.im,
            omega: dynamic + gamma.re,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult<T> {
    pub times: Vec<T>,
    /// Recorded states (only when `keep_states` is set).
    pub states: Vec<StateVector<T>>,
    pub dirac_norm: Vec<T>,
    pub center_traj: Vec<T>,
    pub final_state: StateVector<T>,
    /// Relative change of the final state under `dt → dt/2`, if checked.
    pub halving_change: Option<T>,
    pub phase_ledger: Option<PhaseLedger<T>>,
}

/// Evolves `psi0` under `h` to `t_total` with fixed step `dt`. The Dirac norm is never renormalized.
pub fn evolve<T: Real, H: TimeDependentHamiltonian<T> + ?Sized>(
    h: &H,
    psi0: &[Complex<T>],
    t_total: T,
    dt: T,
    opts: &EvolveOptions<T>,
) -> Result<EvolutionResult<T>> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch(psi0.len(), h.dim()));
    }
    check_step(dt, h.spectral_bound())?;
    let (n, h_dt) = step_count(t_total, dt)?;
    let stride = opts.stride.max(1);
    let mut psi = psi0.to_vec();
    let mut rk = Rk4::new(psi.len());
    let mut out = EvolutionResult {
        times: Vec::new(),
        states: Vec::new(),
        dirac_norm: Vec::new(),
        center_traj: Vec::new(),
        final_state: Vec::new(),
        halving_change: None,
        phase_ledger: None,
    };
    let mut prev = None;
    let mut record = |s: usize, psi: &[Complex<T>], out: &mut EvolutionResult<T>| -> Result<()> {
        let t = T::from_usize_(s) * h_dt;
        let c = center_of_mass(psi, opts.ring, prev)?;
        prev = Some(c);
        out.times.push(t);
        out.dirac_norm.push(dirac_norm(psi));
        out.center_traj.push(c);
        if opts.keep_states {
            out.states.push(psi.to_vec());
        }
        Ok(())
    };
    record(0, &psi, &mut out)?;
    for s in 0..n {
        rk.step(h, T::from_usize_(s) * h_dt, h_dt, &mut psi);
        if (s + 1) % stride == 0 || s + 1 == n {
            record(s + 1, &psi, &mut out)?;
        }
    }
    if opts.check_halving {
        let fine = propagate(h, psi0, t_total, h_dt / T::lit(2.0))?;
        let diff: StateVector<T> = psi.iter().zip(&fine).map(|(a, b)| *a - *b).collect();
        let change = (dirac_norm(&diff) / dirac_norm(&fine)).sqrt();
        out.halving_change = Some(change);
        if !(change < opts.tolerance) {
            return Err(Error::StepTooLarge(format!(
                "halving dt changed the final state by {:e} (relative)",
                change.to_f64_()
            )));
        }
    }
    out.final_state = psi;
    Ok(out)
}

pub fn sample_flux<T: Real>(protocol: &FluxProtocol<T>, times: &[T]) -> Vec<T> {
    times.iter().map(|&t| protocol.flux(t)).collect()
}

/// `x(φ) = x0 + [ε_{k_c}(φ) − ε_{k_c}(0)]/β` in sites, with `ε` the upper-band energy.
pub fn predict_trajectory<T: Real>(
    spec: &SshRingSpec<T>,
    k_c: T,
    beta: T,
    x0: T,
    fluxes: &[T],
) -> Vec<T> {
    let m = SshModel::new(spec.delta, spec.gain, T::zero());
    let e0 = m.energy(k_c).re;
    fluxes
        .iter()
        .map(|&phi| x0 + (m.with_flux(phi).energy(k_c).re - e0) / beta)
        .collect()
}

/// Probability-weighted mean 1-based site index. On rings the circular mean is
/// used and unwrapped against `prev`.
pub fn center_of_mass<T: Real>(psi: &[Complex<T>], ring: bool, prev: Option<T>) -> Result<T> {
    let total = dirac_norm(psi);
    if !(total > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let l = T::from_usize_(psi.len());
    if !ring {
        let s = psi
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (i, z)| a + T::from_usize_(i + 1) * z.norm_sqr());
        return Ok(s / total);
    }
    let two_pi = T::lit(2.0) * T::PI();
    let z = psi.iter().enumerate().fold(re(T::zero()), |a, (i, z)| {
        a + cis(two_pi * T::from_usize_(i + 1) / l) * z.norm_sqr()
    });
    let mut x = z.im.atan2(z.re) * l / two_pi;
    match prev {
        Some(p) => x += l * ((p - x) / l).round(),
        None => {
            if x <= T::zero() {
                x += l;
            }
        }
    }
    Ok(x)
}
