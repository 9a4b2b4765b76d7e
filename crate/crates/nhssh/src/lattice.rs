//! Real-space Hamiltonians: the flux-threaded SSH ring, open SSH segments,
//! the φ-shaped interferometer and its virtual-chain image.
//!
//! Sites are 1-based in the physics (`iΔ(−1)^j` on site `j`, so odd sites carry
//! `−iΔ`) and 0-based in storage. Hopping on bond `j → j+1` is `−t_j` with
//! `t_j = [1 + (−1)^j δ]/2`, so bond 1 is the weak `(1−δ)/2` bond for `δ > 0`.

use std::io::Write;
use std::ops::{Index, IndexMut, Range};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{cis, re, Real};

/// One hopping term: `H[i, j] += amp e^{i q φ}` and `H[j, i] += amp e^{−i q φ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond<T> {
    pub i: usize,
    pub j: usize,
    pub amp: T,
    pub charge: i8,
}

/// A sparse tight-binding operator whose hopping phases depend on a flux `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxOperator<T> {
    pub onsite: Vec<Complex<T>>,
    pub bonds: Vec<Bond<T>>,
}

impl<T: Real> FluxOperator<T> {
    pub fn dim(&self) -> usize {
        self.onsite.len()
    }

    /// `out = H(φ) psi`.
    pub fn apply(&self, flux: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        let e = cis(flux);
        let phase = [e.conj(), re(T::one()), e];
        for ((o, &v), &x) in out.iter_mut().zip(&self.onsite).zip(psi) {
            *o = v * x;
        }
        for b in &self.bonds {
            let p = phase[(b.charge + 1) as usize] * b.amp;
            out[b.i] += p * psi[b.j];
            out[b.j] += p.conj() * psi[b.i];
        }
    }

    pub fn to_dense(&self, flux: T) -> HamiltonianMatrix<T> {
        let mut m = HamiltonianMatrix::zeros(self.dim());
        for (i, &v) in self.onsite.iter().enumerate() {
            m[(i, i)] += v;
        }
        for b in &self.bonds {
            let p = cis(flux * T::lit(f64::from(b.charge))) * b.amp;
            m[(b.i, b.j)] += p;
            m[(b.j, b.i)] += p.conj();
        }
        m
    }

    /// Gershgorin bound on the spectral radius at any flux.
    pub fn spectral_bound(&self) -> T {
        let mut row = vec![T::zero(); self.dim()];
        for (r, v) in row.iter_mut().zip(&self.onsite) {
            *r = v.norm();
        }
        for b in &self.bonds {
            row[b.i] += b.amp.abs();
            row[b.j] += b.amp.abs();
        }
        row.into_iter().fold(T::zero(), T::max)
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HamiltonianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![re(T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = re(T::one());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Copies `block` with its top-left corner at `(r, r)`.
    pub fn set_block(&mut self, r: usize, block: &Self) {
        for i in 0..block.n {
            for j in 0..block.n {
                self[(r + i, r + j)] = block[(i, j)];
            }
        }
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex<T>)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self[(i, j)];
                if v.re != T::zero() || v.im != T::zero() {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Plain-text sparse dump, one `row col re im` line per nonzero (0-based).
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# dim {}", self.dim())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.16e} {:.16e}", i, j, v.re, v.im)?;
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for HamiltonianMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for HamiltonianMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

fn hop<T: Real>(delta: T, j: usize) -> T {
    let s = if j % 2 == 0 { T::one() } else { -T::one() };
    (T::one() + s * delta) / T::lit(2.0)
}

fn stagger<T: Real>(gain: T, j: usize) -> Complex<T> {
    let s = if j % 2 == 0 { T::one() } else { -T::one() };
    Complex::new(T::zero(), s * gain)
}

fn check_finite<T: Real>(xs: &[T]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite model parameter".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshRingSpec<T> {
    /// `N`; the ring has `2N` sites.
    pub n_cells: usize,
    pub delta: T,
    pub gain: T,
    /// Flux per bond `φ`; total flux `Φ = 2Nφ`.
    pub flux: T,
}

impl<T: Real> SshRingSpec<T> {
    pub fn n_sites(&self) -> usize {
        2 * self.n_cells
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::InvalidParameter(format!("n_cells = {} < 2", self.n_cells)));
        }
        check_finite(&[self.delta, self.gain, self.flux])
    }
}

/// Flux-parameterized ring operator; every bond carries charge +1 in the `j → j+1` direction.
pub fn ssh_ring_operator<T: Real>(spec: &SshRingSpec<T>) -> Result<FluxOperator<T>> {
    spec.validate()?;
    let n = spec.n_sites();
    let onsite = (1..=n).map(|j| stagger(spec.gain, j)).collect();
    let bonds = (1..=n)
        .map(|j| Bond {
            i: j - 1,
            j: j % n,
            amp: -hop(spec.delta, j),
            charge: 1,
        })
        .collect();
    Ok(FluxOperator { onsite, bonds })
}

pub fn build_ssh_ring<T: Real>(spec: &SshRingSpec<T>) -> Result<HamiltonianMatrix<T>> {
    Ok(ssh_ring_operator(spec)?.to_dense(spec.flux))
}

/// Site-reversal permutation `j → 2N − j + 1` applied as `P conj(H) P⁻¹`.
pub fn pt_image<T: Real>(h: &HamiltonianMatrix<T>) -> HamiltonianMatrix<T> {
    let n = h.dim();
    HamiltonianMatrix::from_fn(n, |i, j| h[(n - 1 - i, n - 1 - j)].conj())
}

fn push_segment<T: Real>(
    op: &mut FluxOperator<T>,
    offset: usize,
    len: usize,
    delta: T,
    gain: T,
    charge: i8,
) {
    for j in 1..=len {
        op.onsite[offset + j - 1] = stagger(gain, j);
    }
    for j in 1..len {
        op.bonds.push(Bond {
            i: offset + j - 1,
            j: offset + j,
            amp: -hop(delta, j),
            charge,
        });
    }
}

/// Open SSH chain of `n_sites` sites.
pub fn ssh_chain_operator<T: Real>(n_sites: usize, delta: T, gain: T) -> FluxOperator<T> {
    let mut op = FluxOperator {
        onsite: vec![re(T::zero()); n_sites],
        bonds: Vec::new(),
    };
    push_segment(&mut op, 0, n_sites, delta, gain, 0);
    op
}

/// The φ-shaped interferometer: lead A (`2N_A` sites), two arms B1, B2
/// (`2N_B` each) and lead D (`2N_D`).
///
/// Each splitter bond is `−(1+δ)/(2√2)`, i.e. `κ−/√2` with `κ− = −(1+δ)/2`.
/// The partner `κ+ = −(1−δ)/2` is the weak intra-cell bond and never enters a splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSpec<T> {
    pub n_a: usize,
    pub n_b: usize,
    pub n_d: usize,
    pub delta: T,
    pub gain: T,
    /// Flux per bond `φ`; the loop encloses `Φ = 4(N_B + 1/2)φ`.
    pub flux: T,
}

/// Site ranges of the `[A | B1 | B2 | D]` layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkLayout {
    pub a: Range<usize>,
    pub b1: Range<usize>,
    pub b2: Range<usize>,
    pub d: Range<usize>,
}

impl NetworkLayout {
    pub fn dim(&self) -> usize {
        self.d.end
    }

    pub fn ring(&self) -> Range<usize> {
        self.b1.start..self.b2.end
    }
}

impl<T: Real> NetworkSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 || self.n_d == 0 {
            return Err(Error::InvalidParameter("segment lengths must be >= 1".into()));
        }
        check_finite(&[self.delta, self.gain, self.flux])
    }

    pub fn layout(&self) -> NetworkLayout {
        let (la, lb, ld) = (2 * self.n_a, 2 * self.n_b, 2 * self.n_d);
        NetworkLayout {
            a: 0..la,
            b1: la..la + lb,
            b2: la + lb..la + 2 * lb,
            d: la + 2 * lb..la + 2 * lb + ld,
        }
    }

    pub fn splitter_amplitude(&self) -> T {
        (T::one() + self.delta) / (T::lit(2.0) * T::SQRT_2())
    }

    pub fn total_flux(&self) -> T {
        T::lit(4.0) * (T::from_usize_(self.n_b) + T::lit(0.5)) * self.flux
    }
}

/// Network operator. Arm B1 carries `e^{−iφ}` and arm B2 `e^{+iφ}` on every
/// forward bond, splitters included, so that going A → B1 → D → B2 → A winds
/// the phase `4(N_B + 1/2)φ`.
pub fn network_operator<T: Real>(spec: &NetworkSpec<T>) -> Result<FluxOperator<T>> {
    spec.validate()?;
    let l = spec.layout();
    let mut op = FluxOperator {
        onsite: vec![re(T::zero()); l.dim()],
        bonds: Vec::new(),
    };
    push_segment(&mut op, l.a.start, l.a.len(), spec.delta, spec.gain, 0);
    push_segment(&mut op, l.b1.start, l.b1.len(), spec.delta, spec.gain, -1);
    push_segment(&mut op, l.b2.start, l.b2.len(), spec.delta, spec.gain, 1);
    push_segment(&mut op, l.d.start, l.d.len(), spec.delta, spec.gain, 0);
    let k = -spec.splitter_amplitude();
    for (i, j, charge) in [
        (l.a.end - 1, l.b1.start, -1),
        (l.a.end - 1, l.b2.start, 1),
        (l.b1.end - 1, l.d.start, -1),
        (l.b2.end - 1, l.d.start, 1),
    ] {
        op.bonds.push(Bond { i, j, amp: k, charge });
    }
    Ok(op)
}

pub fn build_network<T: Real>(spec: &NetworkSpec<T>) -> Result<HamiltonianMatrix<T>> {
    Ok(network_operator(spec)?.to_dense(spec.flux))
}

/// Three virtual SSH chains and their couplings to the first site of chain d.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSystem<T> {
    /// Lead A followed by the symmetric arm modes, `2(N_A + N_B)` sites.
    pub chain_a: HamiltonianMatrix<T>,
    /// Antisymmetric arm modes, `2N_B` sites.
    pub chain_b: HamiltonianMatrix<T>,
    pub chain_d: HamiltonianMatrix<T>,
    /// Last site of a to first site of d enters as `−t_ad`.
    pub t_ad: Complex<T>,
    /// Last site of b to first site of d enters as `−t_bd`.
    pub t_bd: Complex<T>,
}

impl<T: Real> VirtualSystem<T> {
    /// Full virtual Hamiltonian in the `[a | b | d]` layout.
    pub fn assemble(&self) -> HamiltonianMatrix<T> {
        let (na, nb, nd) = (self.chain_a.dim(), self.chain_b.dim(), self.chain_d.dim());
        let mut m = HamiltonianMatrix::zeros(na + nb + nd);
        m.set_block(0, &self.chain_a);
        m.set_block(na, &self.chain_b);
        m.set_block(na + nb, &self.chain_d);
        let d1 = na + nb;
        m[(na - 1, d1)] = -self.t_ad;
        m[(d1, na - 1)] = -self.t_ad.conj();
        m[(na + nb - 1, d1)] = -self.t_bd;
        m[(d1, na + nb - 1)] = -self.t_bd.conj();
        m
    }
}

/// Couplings `t_ad = (1+δ) cos[(2N_B+1)φ]/2` and `t_bd = −i(1+δ) sin[(2N_B+1)φ]/2`.
/// Integer multiples of π (up to rounding in `φ`) give exact zeros of the sine.
pub fn virtual_couplings<T: Real>(spec: &NetworkSpec<T>) -> (Complex<T>, Complex<T>) {
    let w = T::from_usize_(2 * spec.n_b + 1) * spec.flux;
    let h = (T::one() + spec.delta) / T::lit(2.0);
    let turns = w / T::PI();
    let nearest = turns.round();
    let (s, c) = if (turns - nearest).abs() <= T::lit(8.0) * T::epsilon() * turns.abs().max(T::one()) {
        let odd = (nearest / T::lit(2.0)).fract() != T::zero();
        (T::zero(), if odd { -T::one() } else { T::one() })
    } else {
        w.sin_cos()
    };
    (re(h * c), Complex::new(T::zero(), -h * s))
}

pub fn virtual_decompose<T: Real>(spec: &NetworkSpec<T>) -> Result<VirtualSystem<T>> {
    spec.validate()?;
    let chain = |n: usize| ssh_chain_operator(n, spec.delta, spec.gain).to_dense(T::zero());
    let (t_ad, t_bd) = virtual_couplings(spec);
    Ok(VirtualSystem {
        chain_a: chain(2 * (spec.n_a + spec.n_b)),
        chain_b: chain(2 * spec.n_b),
        chain_d: chain(2 * spec.n_d),
        t_ad,
        t_bd,
    })
}

/// Change of basis from physical sites to virtual modes. Rows are bras
/// `⟨mode|`, so virtual amplitudes are `U ψ` and `U H U†` is the virtual Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMap<T> {
    pub u: HamiltonianMatrix<T>,
}

impl<T: Real> BasisMap<T> {
    /// `U H U†`.
    pub fn transform(&self, h: &HamiltonianMatrix<T>) -> HamiltonianMatrix<T> {
        self.u.matmul(h).matmul(&self.u.adjoint())
    }
}

/// `|ã_j⟩ = (e^{iφj}|B1_j⟩ + e^{−iφj}|B2_j⟩)/√2`, `|b̃_j⟩ = (e^{iφj}|B1_j⟩ − e^{−iφj}|B2_j⟩)/√2`;
/// lead sites map to themselves.
pub fn virtual_basis_map<T: Real>(spec: &NetworkSpec<T>) -> Result<BasisMap<T>> {
    spec.validate()?;
    let l = spec.layout();
    let n = l.dim();
    let mut u = HamiltonianMatrix::zeros(n);
    for i in l.a.clone().chain(l.d.clone()) {
        u[(i, i)] = re(T::one());
    }
    let s = T::one() / T::SQRT_2();
    for j in 1..=l.b1.len() {
        let e = cis(spec.flux * T::from_usize_(j));
        // Row `p` holds ã_j, row `q` holds b̃_j; columns are B1_j and B2_j.
        let (p, q) = (l.b1.start + j - 1, l.b2.start + j - 1);
        u[(p, p)] = e.conj() * s;
        u[(p, q)] = e * s;
        u[(q, p)] = e.conj() * s;
        u[(q, q)] = -e * s;
    }
    Ok(BasisMap { u })
}

/// Arm content projected onto the virtual modes `(ã_j, b̃_j)` at flux `φ`.
pub fn arm_virtual_amplitudes<T: Real>(
    layout: &NetworkLayout,
    flux: T,
    psi: &[Complex<T>],
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let s = T::one() / T::SQRT_2();
    let lb = layout.b1.len();
    let mut a = Vec::with_capacity(lb);
    let mut b = Vec::with_capacity(lb);
    for j in 1..=lb {
        let e = cis(flux * T::from_usize_(j));
        let x1 = psi[layout.b1.start + j - 1] * e.conj();
        let x2 = psi[layout.b2.start + j - 1] * e;
        a.push((x1 + x2) * s);
        b.push((x1 - x2) * s);
    }
    (a, b)
}
