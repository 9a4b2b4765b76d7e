//! Two-band Bloch Hamiltonians `h_k = B(k)·σ` with complex field `B`, their
//! complex polar decomposition and biorthogonal eigenvectors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{cis, principal_sqrt, re, Real};

/// Below this `|r|` a field point is treated as an exceptional point.
pub const EPS_EP: f64 = 1e-10;

/// Flux-threaded non-Hermitian SSH model: dimerization `delta`, staggered
/// gain/loss `gain` (the Δ of `iΔ(−1)^j`) and flux per bond `flux`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshModel<T> {
    pub delta: T,
    pub gain: T,
    pub flux: T,
}

impl<T: Real> SshModel<T> {
    pub fn new(delta: T, gain: T, flux: T) -> Self {
        Self { delta, gain, flux }
    }

    pub fn with_flux(self, flux: T) -> Self {
        Self { flux, ..self }
    }

    pub fn with_delta(self, delta: T) -> Self {
        Self { delta, ..self }
    }

    pub fn is_finite(&self) -> bool {
        self.delta.is_finite() && self.gain.is_finite() && self.flux.is_finite()
    }

    /// `r_k` for the upper band, `sqrt(cos²t + δ² sin²t − Δ²)` with `t = k/2 + φ`.
    pub fn energy(&self, k: T) -> Complex<T> {
        let t = k / T::lit(2.0) + self.flux;
        let (s, c) = t.sin_cos();
        principal_sqrt(re(c * c + self.delta * self.delta * s * s - self.gain * self.gain))
    }

    /// `∂ Re(r_k)/∂k`, the upper-band group velocity in cells per unit time.
    pub fn group_velocity(&self, k: T) -> T {
        let t = k / T::lit(2.0) + self.flux;
        let r = self.energy(k).re;
        (T::one() - self.delta * self.delta) * (T::lit(2.0) * t).sin() / (T::lit(4.0) * r)
    }

    /// `Δ < |δ|`: the periodic ring has a fully real spectrum.
    pub fn is_real_regime(&self) -> bool {
        self.gain.abs() < self.delta.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochField<T> {
    pub k: T,
    pub bx: Complex<T>,
    pub by: Complex<T>,
    pub bz: Complex<T>,
}

impl<T: Real> BlochField<T> {
    pub fn new(k: T, bx: Complex<T>, by: Complex<T>, bz: Complex<T>) -> Self {
        Self { k, bx, by, bz }
    }

    pub fn r_squared(&self) -> Complex<T> {
        self.bx * self.bx + self.by * self.by + self.bz * self.bz
    }

    /// `h_k = Bx σx + By σy + Bz σz` as a row-major 2×2 matrix.
    pub fn matrix(&self) -> [[Complex<T>; 2]; 2] {
        let i = Complex::<T>::i();
        [[self.bz, self.bx - i * self.by], [self.bx + i * self.by, -self.bz]]
    }
}

pub fn build_field<T: Real>(model: &SshModel<T>, k: T) -> BlochField<T> {
    let t = k / T::lit(2.0) + model.flux;
    let (s, c) = t.sin_cos();
    BlochField {
        k,
        bx: re(-c),
        by: re(-model.delta * s),
        bz: Complex::new(T::zero(), -model.gain),
    }
}

/// `∂B/∂k` for the SSH field (Bz is k-independent).
pub fn field_dk<T: Real>(model: &SshModel<T>, k: T) -> (Complex<T>, Complex<T>) {
    let t = k / T::lit(2.0) + model.flux;
    let (s, c) = t.sin_cos();
    let h = T::lit(0.5);
    (re(s * h), re(-model.delta * c * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition<T> {
    pub r: Complex<T>,
    pub cos_theta: Complex<T>,
    pub sin_theta: Complex<T>,
    pub phi_polar: T,
}

impl<T: Real> PolarDecomposition<T> {
    /// `r (sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn reconstruct(&self) -> (Complex<T>, Complex<T>, Complex<T>) {
        let rs = self.r * self.sin_theta;
        let (sp, cp) = self.phi_polar.sin_cos();
        (rs * cp, rs * sp, self.r * self.cos_theta)
    }

    /// `(cos θ/2, sin θ/2)`; the sign of the sine is fixed so `2 sc = sinθ`.
    pub fn half_angles(&self) -> (Complex<T>, Complex<T>) {
        let one = re(T::one());
        let half = T::lit(0.5);
        let c = principal_sqrt((one + self.cos_theta) * half);
        let mut s = principal_sqrt((one - self.cos_theta) * half);
        let two = T::lit(2.0);
        if (c * s * two - self.sin_theta).norm() > (c * s * two + self.sin_theta).norm() {
            s = -s;
        }
        (c, s)
    }

    pub fn with_phi(self, phi_polar: T) -> Self {
        Self { phi_polar, ..self }
    }
}

pub fn polar_decompose<T: Real>(field: &BlochField<T>) -> Result<PolarDecomposition<T>> {
    let r = principal_sqrt(field.r_squared());
    if r.norm() <= T::lit(EPS_EP) {
        return Err(Error::ExceptionalPoint {
            k: field.k.to_f64_(),
            modulus: r.norm().to_f64_(),
        });
    }
    let phi_polar = field.by.re.atan2(field.bx.re);
    let (sp, cp) = phi_polar.sin_cos();
    let rho_xy = field.bx * cp + field.by * sp;
    Ok(PolarDecomposition {
        r,
        cos_theta: field.bz / r,
        sin_theta: rho_xy / r,
        phi_polar,
    })
}

/// Polar decompositions along a k-path with `phi_polar` unwrapped continuously.
pub fn polar_path<T: Real>(model: &SshModel<T>, ks: &[T]) -> Result<Vec<PolarDecomposition<T>>> {
    let two_pi = T::lit(2.0) * T::PI();
    let mut out = Vec::with_capacity(ks.len());
    let mut prev: Option<T> = None;
    for &k in ks {
        let mut p = polar_decompose(&build_field(model, k))?;
        if let Some(q) = prev {
            let turns = ((q - p.phi_polar) / two_pi).round();
            p.phi_polar += turns * two_pi;
        }
        prev = Some(p.phi_polar);
        out.push(p);
    }
    Ok(out)
}

pub type Spinor<T> = [Complex<T>; 2];

/// `⟨a|b⟩` with `a` given as a ket.
#[inline]
pub fn braket<T: Real>(a: &Spinor<T>, b: &Spinor<T>) -> Complex<T> {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Right eigenvectors `rho` and left eigenvectors `chi` (stored as kets, so
/// `⟨chi|` is the conjugate transpose) of `h_k` for energies `±r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthEigenpair<T> {
    pub energy_plus: Complex<T>,
    pub energy_minus: Complex<T>,
    pub rho_plus: Spinor<T>,
    pub rho_minus: Spinor<T>,
    pub chi_plus: Spinor<T>,
    pub chi_minus: Spinor<T>,
}

impl<T: Real> BiorthEigenpair<T> {
    pub fn rho(&self, band: Band) -> &Spinor<T> {
        match band {
            Band::Plus => &self.rho_plus,
            Band::Minus => &self.rho_minus,
        }
    }

    pub fn chi(&self, band: Band) -> &Spinor<T> {
        match band {
            Band::Plus => &self.chi_plus,
            Band::Minus => &self.chi_minus,
        }
    }

    pub fn energy(&self, band: Band) -> Complex<T> {
        match band {
            Band::Plus => self.energy_plus,
            Band::Minus => self.energy_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Band::Plus => T::one(),
            Band::Minus => -T::one(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Band::Plus => "+",
            Band::Minus => "-",
        }
    }
}

/// Eigenvectors in the half-angle gauge:
/// `ρ+ = (c e^{−iφ}, s)`, `ρ− = (s, −c e^{iφ})`, `⟨χ+| = (c e^{iφ}, s)`, `⟨χ−| = (s, −c e^{−iφ})`.
pub fn eigenpair_from_polar<T: Real>(p: &PolarDecomposition<T>) -> BiorthEigenpair<T> {
    let (c, s) = p.half_angles();
    let e = cis(p.phi_polar);
    let ec = e.conj();
    let rho_plus = [c * ec, s];
    let rho_minus = [s, -c * e];
    let chi_plus = [(c * e).conj(), s.conj()];
    let chi_minus = [s.conj(), (-c * ec).conj()];
    BiorthEigenpair {
        energy_plus: p.r,
        energy_minus: -p.r,
        rho_plus,
        rho_minus,
        chi_plus,
        chi_minus,
    }
}

pub fn eigenpair<T: Real>(field: &BlochField<T>) -> Result<BiorthEigenpair<T>> {
    Ok(eigenpair_from_polar(&polar_decompose(field)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reality {
    FullyReal,
    Broken,
    EpOnGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealityReport<T> {
    /// `min_k Re(Bx² + By²) − Δ²`, i.e. `min_k Re r_k²`.
    pub min_margin: T,
    pub min_modulus: T,
    pub class: Reality,
}

/// Classifies the spectrum on the uniform grid `k = 2πn/n_k`.
pub fn spectrum_reality<T: Real>(model: &SshModel<T>, n_k: usize) -> Result<RealityReport<T>> {
    if n_k < 2 {
        return Err(Error::InvalidParameter(format!("n_k = {n_k} < 2")));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let mut min_margin = T::infinity();
    let mut min_modulus = T::infinity();
    for n in 0..n_k {
        let k = two_pi * T::from_usize_(n) / T::from_usize_(n_k);
        let r2 = build_field(model, k).r_squared();
        min_margin = min_margin.min(r2.re);
        min_modulus = min_modulus.min(principal_sqrt(r2).norm());
    }
    let class = if min_modulus <= T::lit(EPS_EP) {
        Reality::EpOnGrid
    } else if min_margin > T::zero() {
        Reality::FullyReal
    } else {
        Reality::Broken
    };
    Ok(RealityReport {
        min_margin,
        min_modulus,
        class,
    })
}

/// Grid `k_n = 2πn/n_k` for `n = 0..n_k` (endpoint excluded).
pub fn k_grid<T: Real>(n_k: usize) -> Vec<T> {
    let two_pi = T::lit(2.0) * T::PI();
    (0..n_k)
        .map(|n| two_pi * T::from_usize_(n) / T::from_usize_(n_k))
        .collect()
}
