//! Dense complex matrices of dimension 2 and 4.
//!
//! Everything in the crate works in the product basis `|00⟩, |01⟩, |10⟩, |11⟩`
//! where the first factor is subsystem 1. The storage is a fixed inline array
//! so matrices are `Copy` and no operation allocates.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_ENTRIES: usize = 16;

/// Hermiticity tolerance for validated matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in `[-PSD_CLIP, 0)` are rounding noise and get clipped to zero.
pub const PSD_CLIP: f64 = 1e-10;

const EIG_HERMITIAN_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TARGET: f64 = 1e-14;
const SVD_ORTHO_TOL: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which factor of the two-qubit product space to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

impl TryFrom<u8> for Subsystem {
    type Error = Error;

    fn try_from(part: u8) -> Result<Self> {
        match part {
            1 => Ok(Subsystem::First),
            2 => Ok(Subsystem::Second),
            _ => Err(Error::Precondition(format!("subsystem index must be 1 or 2, got {part}"))),
        }
    }
}

/// A row-major square complex matrix of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; MAX_ENTRIES],
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::InvalidDimension { expected: "2 or 4", got: dim })
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(ComplexMatrix { dim, data: [ZERO; MAX_ENTRIES] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from nested rows; the outer length sets the dimension.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != dim) {
            return Err(Error::InvalidDimension { expected: "square rows", got: bad.as_ref().len() });
        }
        Self::from_fn(dim, |i, j| rows[i].as_ref()[j])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Ok(m)
    }

    /// The outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidDimension { expected: "equal vector lengths", got: b.len() });
        }
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(&[[ZERO, ONE], [ONE, ZERO]]).expect("2x2")
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[[ZERO, -I], [I, ZERO]]).expect("2x2")
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]).expect("2x2")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)]).collect()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut out = *self;
        for z in out.entries_mut() {
            *z = z.conj();
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        for z in out.entries_mut() {
            *z *= factor;
        }
        out
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidDimension { expected: "matching dimensions", got: rhs.dim });
        }
        let n = self.dim;
        Self::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }

    /// `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries().iter().zip(other.entries()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// `(M + M†)/2`, with an exactly real diagonal.
    pub fn symmetrized(&self) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            out[(i, i)] = Complex64::new(self[(i, i)].re, 0.0);
            for j in i + 1..self.dim {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    #[inline]
    fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    #[inline]
    fn entries_mut(&mut self) -> &mut [Complex64] {
        let n = self.dim * self.dim;
        &mut self.data[..n]
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

/// Panics on a dimension mismatch; use [`ComplexMatrix::checked_mul`] for untrusted input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        let mut out = *self;
        for (a, b) in out.entries_mut().iter_mut().zip(rhs.entries()) {
            *a += b;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        let mut out = *self;
        for (a, b) in out.entries_mut().iter_mut().zip(rhs.entries()) {
            *a -= b;
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// `a ⊗ b` for two 2×2 matrices, indexed so that `|mk⟩ = |m⟩ ⊗ |k⟩`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::InvalidDimension { expected: "2", got: m.dim });
        }
    }
    ComplexMatrix::from_fn(4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Eigen-decomposition `M = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermitianEigenSystem {
    /// Sorted in descending order; only the first `dim` entries are meaningful.
    eigenvalues: [f64; 4],
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.eigenvectors.dim]
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.dim
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues().iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k]).sum())
            .expect("dimension already validated")
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }

    /// Smallest eigenvalue; the PSD checks look at this.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[self.dim() - 1]
    }
}

/// The unitary of one complex Jacobi rotation acting on the `(p, q)` plane.
///
/// For a Hermitian 2×2 block `[[a, b], [b*, d]]` with `b = |b| e^{iφ}` the
/// rotation is `diag(1, e^{-iφ})` followed by the real rotation that zeroes
/// the now-real `|b|`.
#[derive(Clone, Copy)]
struct Rotation {
    upp: Complex64,
    upq: Complex64,
    uqp: Complex64,
    uqq: Complex64,
}

impl Rotation {
    fn annihilating(app: f64, aqq: f64, apq: Complex64) -> Self {
        let mag = apq.norm();
        let phase = (apq / mag).conj();
        let theta = (aqq - app) / (2.0 * mag);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        Rotation {
            upp: Complex64::new(c, 0.0),
            upq: Complex64::new(s, 0.0),
            uqp: phase * -s,
            uqq: phase * c,
        }
    }

    /// `m ← m U` on columns `p`, `q`.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.dim {
            let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
            m[(k, p)] = mkp * self.upp + mkq * self.uqp;
            m[(k, q)] = mkp * self.upq + mkq * self.uqq;
        }
    }

    /// `m ← U† m` on rows `p`, `q`.
    fn apply_left_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.dim {
            let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
            m[(p, k)] = self.upp.conj() * mpk + self.uqp.conj() * mqk;
            m[(q, k)] = self.upq.conj() * mpk + self.uqq.conj() * mqk;
        }
    }
}

/// Cyclic complex Jacobi eigensolver.
///
/// The input is symmetrized as `(M + M†)/2` before iterating; inputs further
/// than `1e-10` from Hermitian are rejected.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    let dev = m.hermitian_deviation();
    if dev > EIG_HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.dim;
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n)?;
    // Absolute target for O(1) matrices, scaled up for larger norms.
    let target = JACOBI_OFF_TARGET * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let rot = Rotation::annihilating(a[(p, p)].re, a[(q, q)].re, apq);
                rot.apply_right(&mut a, p, q);
                rot.apply_left_adjoint(&mut a, p, q);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                rot.apply_right(&mut v, p, q);
            }
        }
    }
    if !converged && a.off_diagonal_norm() > target {
        return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_norm: a.off_diagonal_norm() });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = ComplexMatrix::zeros(n)?;
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = a[(src, src)].re;
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
}

/// Principal square root of a PSD matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_psd_from(&eig_hermitian(m)?)
}

/// As [`sqrt_psd`], reusing an existing decomposition.
pub fn sqrt_psd_from(eig: &HermitianEigenSystem) -> Result<ComplexMatrix> {
    let min = eig.min_eigenvalue();
    if min < -PSD_CLIP {
        return Err(Error::NotPsd(min));
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// Working on the columns directly keeps tiny singular values accurate in
/// absolute terms, which forming `M†M` would not.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = m.dim;
    let mut a = *m;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..n {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                let g = gamma.norm();
                if g == 0.0 || g <= SVD_ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                Rotation::annihilating(alpha, beta, gamma).apply_right(&mut a, p, q);
            }
        }
        if !rotated {
            let mut sv: Vec<f64> =
                (0..n).map(|j| (0..n).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
            sv.sort_by(|x, y| y.total_cmp(x));
            return Ok(sv);
        }
    }
    Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_norm: f64::NAN })
}

/// Reduced 2×2 state of subsystem `keep`, tracing out the other qubit.
///
/// With `ρ = Σ Ψ_{mm'kk'} |mk⟩⟨m'k'|`, keeping subsystem 1 gives
/// `A_{mm'} = Σ_k Ψ_{mm'kk}`.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if rho.dim != 4 {
        return Err(Error::InvalidDimension { expected: "4", got: rho.dim });
    }
    let dev = rho.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > HERMITIAN_TOL {
        return Err(Error::TraceNotUnit(tr.re));
    }
    Ok(partial_trace_unchecked(rho, keep))
}

pub(crate) fn partial_trace_unchecked(rho: &ComplexMatrix, keep: Subsystem) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match keep {
        Subsystem::First => rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)],
        Subsystem::Second => rho[(i, j)] + rho[(2 + i, 2 + j)],
    })
    .expect("2x2")
}

/// `Tr{ρ²}`, evaluated as `Σ |ρ_ij|²` (equal for Hermitian input).
pub fn purity(m: &ComplexMatrix) -> f64 {
    m.entries().iter().map(|z| z.norm_sqr()).sum()
}
