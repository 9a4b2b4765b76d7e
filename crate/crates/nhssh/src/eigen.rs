//! Dense complex eigenvalues and multiset comparison.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;
use crate::real::Real;

/// Eigenvalues of a general complex matrix, sorted by real then imaginary part.
pub fn spectrum<T: Real>(h: &HamiltonianMatrix<T>) -> Result<Vec<Complex<T>>> {
    let mut ev = T::dense_eigenvalues(h.dim(), h.as_slice())
        .ok_or_else(|| Error::NonConvergence("dense eigensolver did not converge".into()))?;
    sort_complex(&mut ev);
    Ok(ev)
}

pub fn sort_complex<T: Real>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
/// Returns infinity when the sizes differ.
pub fn multiset_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    if a.len() != b.len() {
        return T::infinity();
    }
    let mut used = vec![false; b.len()];
    let mut worst = T::zero();
    for x in a {
        let mut best = None;
        let mut best_d = T::infinity();
        for (i, y) in b.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (*x - *y).norm();
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            used[i] = true;
        }
        worst = worst.max(best_d);
    }
    worst
}

pub fn max_imag<T: Real>(ev: &[Complex<T>]) -> T {
    ev.iter().fold(T::zero(), |m, z| m.max(z.im.abs()))
}
