use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type the whole crate is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }

    fn to_f64_(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn error_function(self) -> Self;

    /// Eigenvalues of a dense row-major `n × n` complex matrix.
    fn dense_eigenvalues(n: usize, data: &[Complex<Self>]) -> Option<Vec<Complex<Self>>>;
}

// Sequential on purpose: identical inputs must give bit-identical spectra.
macro_rules! faer_eigenvalues {
    ($t:ty, $n:expr, $data:expr) => {{
        faer::set_global_parallelism(faer::Par::Seq);
        let n = $n;
        let data = $data;
        let m = faer::Mat::<Complex<$t>>::from_fn(n, n, |i, j| data[i * n + j]);
        m.eigenvalues().ok()
    }};
}

impl Real for f32 {
    fn error_function(self) -> Self {
        libm::erff(self)
    }

    fn dense_eigenvalues(n: usize, data: &[Complex<Self>]) -> Option<Vec<Complex<Self>>> {
        faer_eigenvalues!(f32, n, data)
    }
}

impl Real for f64 {
    fn error_function(self) -> Self {
        libm::erf(self)
    }

    fn dense_eigenvalues(n: usize, data: &[Complex<Self>]) -> Option<Vec<Complex<Self>>> {
        faer_eigenvalues!(f64, n, data)
    }
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Principal square root with the tie rule: when `Re = 0` the root with `Im ≥ 0` wins.
pub(crate) fn principal_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let mut s = z.sqrt();
    if s.re < T::zero() || (s.re == T::zero() && s.im < T::zero()) {
        s = -s;
    }
    s
}

/// Complex logarithm with imaginary part in (−π, π].
pub(crate) fn principal_ln<T: Real>(z: Complex<T>) -> Complex<T> {
    let mut arg = z.im.atan2(z.re);
    if arg <= -T::PI() {
        arg += T::lit(2.0) * T::PI();
    }
    Complex::new(z.norm().ln(), arg)
}

/// Composite trapezoid rule for a periodic integrand on [a, a + period) with `n` panels.
pub fn periodic_trapezoid<T: Real, F>(a: T, period: T, n: usize, mut f: F) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let h = period / T::from_usize_(n);
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        acc += f(a + h * T::from_usize_(i));
    }
    acc * h
}

/// Composite trapezoid rule on [a, b] with `n` panels (non-periodic).
pub fn trapezoid<T: Real, F>(a: T, b: T, n: usize, mut f: F) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let h = (b - a) / T::from_usize_(n);
    let half = T::lit(0.5);
    let mut acc = (f(a) + f(b)) * half;
    for i in 1..n {
        acc += f(a + h * T::from_usize_(i));
    }
    acc * h
}
