//! Complex Zak phase of the SSH ring three ways, plus the flux-driven
//! adiabatic phase `γ±`.
//!
//! Convention: sublattice A (odd sites) is Fourier transformed with
//! `e^{ik(j−1/2)}`, which makes `h_k` 4π-periodic with `h(k+2π) = σz h(k) σz`.

use num_complex::Complex;

use crate::bloch::{
    braket, build_field, field_dk, polar_path, Band, BiorthEigenpair, SshModel, Spinor,
};
use crate::error::{Error, Result};
use crate::real::{periodic_trapezoid, principal_ln, principal_sqrt, re, trapezoid, Real};

pub const DEFAULT_N_QUAD: usize = 4096;
pub const DEFAULT_N_K: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZakMethod {
    ClosedForm,
    Quadrature,
    WilsonLoop,
}

impl ZakMethod {
    pub fn label(self) -> &'static str {
        match self {
            ZakMethod::ClosedForm => "closed_form",
            ZakMethod::Quadrature => "quadrature",
            ZakMethod::WilsonLoop => "wilson_loop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZakResult<T> {
    pub band: Band,
    pub value: Complex<T>,
    pub method: ZakMethod,
    pub n_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPhase<T> {
    pub band: Band,
    pub gamma: Complex<T>,
    pub flux_from: T,
    pub flux_to: T,
}

fn require_real<T: Real>(delta: T, gain: T) -> Result<()> {
    if gain.abs() < delta.abs() {
        Ok(())
    } else {
        Err(Error::SpectrumNotReal {
            delta: delta.to_f64_(),
            gain: gain.to_f64_(),
        })
    }
}

/// `Z± = ±(π/2) sgn δ ∓ iΔδ ∫₀^{2π} dk / [4 r_k (r_k² + Δ²)]`.
pub fn zak_closed_form<T: Real>(delta: T, gain: T, band: Band, n_quad: usize) -> Result<ZakResult<T>> {
    require_real(delta, gain)?;
    let model = SshModel::new(delta, gain, T::zero());
    let two_pi = T::lit(2.0) * T::PI();
    let g2 = gain * gain;
    let integral = periodic_trapezoid(T::zero(), two_pi, n_quad, |k| {
        let r = model.energy(k).re;
        re(T::one() / (T::lit(4.0) * r * (r * r + g2)))
    })
    .re;
    let s = band.sign::<T>();
    Ok(ZakResult {
        band,
        value: Complex::new(s * T::FRAC_PI_2() * delta.signum(), -s * gain * delta * integral),
        method: ZakMethod::ClosedForm,
        n_k: n_quad,
    })
}

/// Upper-band connection `(1 + cosθ)/2 · (Bx ∂By − By ∂Bx)/(Bx² + By²)` at `k`.
/// `dk_scale` converts the `k` derivative into a derivative along another parameter.
fn connection_plus<T: Real>(model: &SshModel<T>, k: T, dk_scale: T) -> Complex<T> {
    let f = build_field(model, k);
    let (dbx, dby) = field_dk(model, k);
    let rho2 = f.bx * f.bx + f.by * f.by;
    let r = principal_sqrt(f.r_squared());
    let cos_theta = f.bz / r;
    let dphi = (f.bx * dby - f.by * dbx) / rho2 * dk_scale;
    (re(T::one()) + cos_theta) * T::lit(0.5) * dphi
}

/// Trapezoid quadrature of the biorthogonal Berry connection
/// `A_k± = i⟨χ±|∂_k ρ±⟩ = ±(1 + cosθ)/2 · ∂_k φ` over `[0, 2π]`.
pub fn zak_quadrature<T: Real>(model: &SshModel<T>, band: Band, n_quad: usize) -> Result<ZakResult<T>> {
    require_real(model.delta, model.gain)?;
    let two_pi = T::lit(2.0) * T::PI();
    let v = periodic_trapezoid(T::zero(), two_pi, n_quad, |k| connection_plus(model, k, T::one()));
    Ok(ZakResult {
        band,
        value: v * band.sign::<T>(),
        method: ZakMethod::Quadrature,
        n_k: n_quad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilsonScheme {
    /// `i Σ Log⟨χ_j|ρ_{j+1}⟩`; first order in the imaginary part.
    OneSided,
    /// `i Σ ½[Log⟨χ_j|ρ_{j+1}⟩ − Log⟨χ_{j+1}|ρ_j⟩]`; second order.
    Symmetric,
    /// Richardson combination of the symmetric sums over steps `h` and `2h`; fourth order.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonOptions<T> {
    pub scheme: WilsonScheme,
    /// Fail with `NonConvergence` if doubling `n_k` moves the value by more than this.
    pub tolerance: Option<T>,
}

impl<T: Real> Default for WilsonOptions<T> {
    fn default() -> Self {
        Self {
            scheme: WilsonScheme::Extrapolated,
            tolerance: Some(T::lit(1e-6)),
        }
    }
}

/// Discrete biorthogonal Wilson loop for one band.
///
/// The loop closes through `k = 2π` evaluated directly (with `φ_polar`
/// unwrapped), which is the sublattice-twisted image `diag(−1, 1)` of `k = 0`.
pub fn zak_wilson_loop<T: Real>(
    model: &SshModel<T>,
    band: Band,
    n_k: usize,
    opts: &WilsonOptions<T>,
) -> Result<ZakResult<T>> {
    let value = wilson_sum(model, band, n_k, opts.scheme, &|_| re(T::one()))?;
    if let Some(tol) = opts.tolerance {
        let fine = wilson_sum(model, band, 2 * n_k, opts.scheme, &|_| re(T::one()))?;
        let change = (fine - value).norm();
        if !(change <= tol) {
            return Err(Error::NonConvergence(format!(
                "Wilson loop changed by {:e} between n_k = {} and {}",
                change.to_f64_(),
                n_k,
                2 * n_k
            )));
        }
    }
    Ok(ZakResult {
        band,
        value,
        method: ZakMethod::WilsonLoop,
        n_k,
    })
}

/// Raw Wilson sum with a gauge factor `g(k)`: `ρ → g ρ`, `χ → χ / g*`.
pub fn wilson_sum<T: Real>(
    model: &SshModel<T>,
    band: Band,
    n_k: usize,
    scheme: WilsonScheme,
    gauge: &dyn Fn(T) -> Complex<T>,
) -> Result<Complex<T>> {
    if n_k < 16 {
        return Err(Error::InvalidParameter(format!("n_k = {n_k} < 16")));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let ks: Vec<T> = (0..n_k + 2)
        .map(|j| two_pi * T::from_usize_(j) / T::from_usize_(n_k))
        .collect();
    let path = polar_path(model, &ks)?;
    let frames: Vec<(Spinor<T>, Spinor<T>)> = path
        .iter()
        .zip(&ks)
        .map(|(p, &k)| {
            let e: BiorthEigenpair<T> = crate::bloch::eigenpair_from_polar(p);
            let g = gauge(k);
            let gi = g.conj().inv();
            let r = e.rho(band);
            let c = e.chi(band);
            ([r[0] * g, r[1] * g], [c[0] * gi, c[1] * gi])
        })
        .collect();
    let log_ov = |a: usize, b: usize| principal_ln(braket(&frames[a].1, &frames[b].0));
    let f = |a: usize, b: usize| (log_ov(a, b) - log_ov(b, a)) * T::lit(0.5);
    let i = Complex::<T>::i();
    let w = match scheme {
        WilsonScheme::OneSided => (0..n_k).map(|j| log_ov(j, j + 1)).fold(re(T::zero()), |a, b| a + b),
        WilsonScheme::Symmetric => (0..n_k).map(|j| f(j, j + 1)).fold(re(T::zero()), |a, b| a + b),
        WilsonScheme::Extrapolated => {
            let w1 = (0..n_k).map(|j| f(j, j + 1)).fold(re(T::zero()), |a, b| a + b);
            let w2 = (0..n_k).map(|j| f(j, j + 2)).fold(re(T::zero()), |a, b| a + b) * T::lit(0.5);
            (w1 * T::lit(4.0) - w2) / T::lit(3.0)
        }
    };
    Ok(i * w)
}

/// `γ± = ±∫ A_φ dφ` from the model's flux to `flux_to` at fixed `k`, with
/// `A_φ = δ / [2 r (r + iΔ)]` evaluated from the field.
pub fn adiabatic_phase_at<T: Real>(
    model: &SshModel<T>,
    band: Band,
    flux_to: T,
    k: T,
    n_quad: usize,
) -> Result<AdiabaticPhase<T>> {
    let from = model.flux;
    let mut real = true;
    let v = trapezoid(from, flux_to, n_quad, |phi| {
        let m = model.with_flux(phi);
        if !(build_field(&m, k).r_squared().re > T::zero()) {
            real = false;
        }
        connection_plus(&m, k, T::lit(2.0))
    });
    if !real || !model.is_real_regime() {
        return Err(Error::SpectrumNotReal {
            delta: model.delta.to_f64_(),
            gain: model.gain.to_f64_(),
        });
    }
    Ok(AdiabaticPhase {
        band,
        gamma: v * band.sign::<T>(),
        flux_from: from,
        flux_to,
    })
}

/// [`adiabatic_phase_at`] at `k = 0`; the result is k-independent.
pub fn adiabatic_phase<T: Real>(
    model: &SshModel<T>,
    band: Band,
    flux_to: T,
    n_quad: usize,
) -> Result<AdiabaticPhase<T>> {
    adiabatic_phase_at(model, band, flux_to, T::zero(), n_quad)
}

/// Amplification exponent `ξ+ = −Im γ+` for a flux sweep `0 → π`.
pub fn xi_plus<T: Real>(delta: T, gain: T, n_quad: usize) -> Result<T> {
    let m = SshModel::new(delta, gain, T::zero());
    Ok(-adiabatic_phase(&m, Band::Plus, T::PI(), n_quad)?.gamma.im)
}
