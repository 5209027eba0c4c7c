//! Exact reconstruction of the Roughness quadratic form.
//!
//! For a qubit state `ρ = Σ A_{nm} |n⟩⟨m|` the squared Roughness expands as
//!
//! ```text
//! R²(ρ) = Σ A*_{nm} A_{n'm'} [WW + HH − WH − HW](n, m, n', m')
//! ```
//!
//! where each term is a phase-space overlap integral between the Wigner
//! (`W`) and Husimi (`H`) kernels of the operators `|n⟩⟨m|` and `|n'⟩⟨m'|`,
//! normalized so that `2π ∫ dq dp` of a product is the tabulated value.
//! For Fock indices in `{0, 1}` every overlap is rational, so the table and
//! the resulting 3×3 matrix `Λ` (with `R² = v†Λv`) are computed exactly.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::states::{SingleQubitState, VVector};
use crate::{Error, Result};

/// Scalars the terminating series can be summed over.
pub trait SeriesScalar: num_traits::Num + Copy + fmt::Debug {
    fn from_i64(n: i64) -> Self;
}

impl SeriesScalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
}

impl SeriesScalar for Rational64 {
    fn from_i64(n: i64) -> Self {
        Rational64::from_integer(n)
    }
}

/// `₂F₁(a, b; c; x)` for a non-positive integer `a`, where the series stops
/// after `1 - a` terms: `Σ_{k=0}^{-a} (a)_k (b)_k / (c)_k · x^k / k!`.
pub fn hyp2f1_terminating_in<T: SeriesScalar>(a: i64, b: T, c: T, x: T) -> Result<T> {
    if a > 0 {
        return Err(Error::Precondition(format!("series only terminates for a <= 0, got a = {a}")));
    }
    let mut sum = T::one();
    let mut term = T::one();
    for k in 0..-a {
        let kk = T::from_i64(k);
        let ck = c + kk;
        if ck.is_zero() {
            return Err(Error::Domain(format!("(c)_k vanishes at k = {} before the series terminates", k + 1)));
        }
        term = term * (T::from_i64(a) + kk) * (b + kk) / (ck * (kk + T::one())) * x;
        sum = sum + term;
    }
    Ok(sum)
}

pub fn hyp2f1_terminating(a: i64, b: f64, c: f64, x: f64) -> Result<f64> {
    hyp2f1_terminating_in(a, b, c, x)
}

pub fn hyp2f1_terminating_exact(a: i64, b: Rational64, c: Rational64, x: Rational64) -> Result<Rational64> {
    hyp2f1_terminating_in(a, b, c, x)
}

/// Which pair of phase-space kernels an overlap integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKind {
    WignerWigner,
    HusimiHusimi,
    WignerHusimi,
    HusimiWigner,
}

impl OverlapKind {
    pub const ALL: [OverlapKind; 4] =
        [OverlapKind::WignerWigner, OverlapKind::HusimiHusimi, OverlapKind::WignerHusimi, OverlapKind::HusimiWigner];

    fn slot(self) -> usize {
        self as usize
    }
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

fn isqrt_exact(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r * r == n).then_some(r)
}

/// Square root of a rational that is a perfect square.
fn sqrt_exact(r: Rational64) -> Result<Rational64> {
    match (isqrt_exact(*r.numer()), isqrt_exact(*r.denom())) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(Error::Domain(format!("sqrt({r}) is irrational"))),
    }
}

fn pow(base: Rational64, exp: u32) -> Rational64 {
    (0..exp).fold(Rational64::one(), |acc, _| acc * base)
}

fn sign(exp: u32) -> Rational64 {
    if exp % 2 == 0 {
        Rational64::one()
    } else {
        -Rational64::one()
    }
}

fn half_integer(twice: u32) -> Result<u32> {
    if twice % 2 != 0 {
        return Err(Error::Invariant(format!("expected an even index sum, got {twice}")));
    }
    Ok(twice / 2)
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// One overlap term for Fock indices in `{0, 1}`, in exact arithmetic.
///
/// With `X = max(n, m)`, `Y = min(n, m)` and primed analogues:
///
/// - WW: `δ_{nn'} δ_{mm'}`
/// - HH: `δ_{n-m,n'-m'} (1/2)^{1+v} v! / √(n! m! n'! m'!)`, `v = (n+m+n'+m')/2`
/// - WH: `(2/3) δ (-1)^Y √(Y!/(X!Y!Y'!)) 2^{X-Y} (1/3)^u ₂F₁(-Y, u+1; X-Y+1; 4/3)`,
///   `u = (X-Y+X'+Y')/2`
/// - HW: the same with primed and unprimed roles exchanged.
pub fn overlap_exact(kind: OverlapKind, n: u32, m: u32, n_p: u32, m_p: u32) -> Result<Rational64> {
    if [n, m, n_p, m_p].iter().any(|&i| i > 1) {
        return Err(Error::Precondition("overlap indices must be 0 or 1".into()));
    }
    if kind == OverlapKind::WignerWigner {
        return Ok(if n == n_p && m == m_p { Rational64::one() } else { Rational64::zero() });
    }
    if n as i64 - m as i64 != n_p as i64 - m_p as i64 {
        return Ok(Rational64::zero());
    }
    let f = |i: u32| factorial(i);
    let fourth_thirds = r(4, 3);
    let (x, y) = (n.max(m), n.min(m));
    let (x_p, y_p) = (n_p.max(m_p), n_p.min(m_p));
    match kind {
        OverlapKind::WignerWigner => unreachable!(),
        OverlapKind::HusimiHusimi => {
            let v = half_integer(n + m + n_p + m_p)?;
            let norm = sqrt_exact(r(1, f(n) * f(m) * f(n_p) * f(m_p)))?;
            Ok(norm * pow(r(1, 2), 1 + v) * Rational64::from_integer(f(v)))
        }
        OverlapKind::WignerHusimi => {
            let u = half_integer(x - y + x_p + y_p)?;
            let norm = sqrt_exact(r(f(y), f(x) * f(y) * f(y_p)))?;
            let series = hyp2f1_terminating_exact(
                -(y as i64),
                Rational64::from_integer(u as i64 + 1),
                Rational64::from_integer((x - y) as i64 + 1),
                fourth_thirds,
            )?;
            Ok(r(2, 3) * sign(y) * norm * pow(r(2, 1), x - y) * pow(r(1, 3), u) * series)
        }
        OverlapKind::HusimiWigner => {
            let u_p = half_integer(x_p - y_p + x + y)?;
            let norm = sqrt_exact(r(f(y_p), f(x) * f(y) * f(x_p)))?;
            let series = hyp2f1_terminating_exact(
                -(y_p as i64),
                Rational64::from_integer(u_p as i64 + 1),
                Rational64::from_integer((x_p - y_p) as i64 + 1),
                fourth_thirds,
            )?;
            Ok(r(2, 3) * sign(y_p) * norm * pow(r(2, 1), x_p - y_p) * pow(r(1, 3), u_p) * series)
        }
    }
}

pub fn overlap(kind: OverlapKind, n: u32, m: u32, n_p: u32, m_p: u32) -> Result<f64> {
    Ok(to_f64(overlap_exact(kind, n, m, n_p, m_p)?))
}

fn to_f64(q: Rational64) -> f64 {
    q.to_f64().expect("small rationals convert")
}

#[inline]
fn slot(n: u32, m: u32, n_p: u32, m_p: u32) -> usize {
    (8 * n + 4 * m + 2 * n_p + m_p) as usize
}

/// All 64 overlap values for indices in `{0, 1}⁴`.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    values: [[Rational64; 16]; 4],
}

/// One row of an [`OverlapTable`].
#[derive(Clone, Copy, Debug)]
pub struct OverlapEntry {
    pub kind: OverlapKind,
    pub n: u32,
    pub m: u32,
    pub n_prime: u32,
    pub m_prime: u32,
    pub value: Rational64,
}

impl OverlapTable {
    pub fn build() -> Result<Self> {
        let mut values = [[Rational64::zero(); 16]; 4];
        for kind in OverlapKind::ALL {
            for (n, m, n_p, m_p) in index_tuples() {
                values[kind.slot()][slot(n, m, n_p, m_p)] = overlap_exact(kind, n, m, n_p, m_p)?;
            }
        }
        Ok(OverlapTable { values })
    }

    /// Shared instance; the table is a constant.
    pub fn shared() -> &'static OverlapTable {
        static TABLE: OnceLock<OverlapTable> = OnceLock::new();
        TABLE.get_or_init(|| OverlapTable::build().expect("overlap table is well-formed"))
    }

    pub fn get(&self, kind: OverlapKind, n: u32, m: u32, n_p: u32, m_p: u32) -> Rational64 {
        self.values[kind.slot()][slot(n, m, n_p, m_p)]
    }

    /// `WW + HH − WH − HW`.
    pub fn bracket(&self, n: u32, m: u32, n_p: u32, m_p: u32) -> Rational64 {
        use OverlapKind::*;
        self.get(WignerWigner, n, m, n_p, m_p) + self.get(HusimiHusimi, n, m, n_p, m_p)
            - self.get(WignerHusimi, n, m, n_p, m_p)
            - self.get(HusimiWigner, n, m, n_p, m_p)
    }

    pub fn entries(&self) -> impl Iterator<Item = OverlapEntry> + '_ {
        OverlapKind::ALL.into_iter().flat_map(move |kind| {
            index_tuples().map(move |(n, m, n_prime, m_prime)| OverlapEntry {
                kind,
                n,
                m,
                n_prime,
                m_prime,
                value: self.get(kind, n, m, n_prime, m_prime),
            })
        })
    }

    /// `R²(ρ)` by the direct 16-term double sum.
    pub fn roughness_sq(&self, state: &SingleQubitState) -> f64 {
        let a = |n: u32, m: u32| state.rho()[(n as usize, m as usize)];
        index_tuples()
            .map(|(n, m, n_p, m_p)| (a(n, m).conj() * a(n_p, m_p) * to_f64(self.bracket(n, m, n_p, m_p))).re)
            .sum()
    }
}

fn index_tuples() -> impl Iterator<Item = (u32, u32, u32, u32)> {
    (0..16u32).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1))
}

/// Symmetric 3×3 coefficient matrix with `R² = v†Λv` in the basis of [`VVector`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaMatrix {
    pub entries: [[f64; 3]; 3],
}

/// The exact form of [`LambdaMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactLambda {
    pub entries: [[Rational64; 3]; 3],
}

impl ExactLambda {
    /// `(1/108)·[[18, 0, −21], [0, 39, 0], [−21, 0, 55]]`.
    pub fn reference() -> Self {
        let e = |n| r(n, 108);
        ExactLambda { entries: [[e(18), e(0), e(-21)], [e(0), e(39), e(0)], [e(-21), e(0), e(55)]] }
    }

    pub fn to_f64(&self) -> LambdaMatrix {
        LambdaMatrix { entries: self.entries.map(|row| row.map(to_f64)) }
    }

    pub fn max_deviation(&self, other: &ExactLambda) -> Rational64 {
        let mut dev = Rational64::zero();
        for i in 0..3 {
            for j in 0..3 {
                dev = dev.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        dev
    }
}

impl LambdaMatrix {
    pub fn reference() -> Self {
        ExactLambda::reference().to_f64()
    }

    pub fn max_deviation(&self, other: &LambdaMatrix) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                dev = dev.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        dev
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// `v†Λv`.
    pub fn quadratic_form(&self, v: &VVector) -> f64 {
        let comps = [Complex64::new(v.v1, 0.0), v.v2, Complex64::new(v.v3, 0.0)];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += comps[i].conj() * self.entries[i][j] * comps[j];
            }
        }
        acc.re
    }
}

/// Assembles `Λ` from the bracket table.
///
/// Populations map to `v1 = A_00` and `v3 = A_11`; both coherences feed
/// `v2 = √2·A_01`, so `Λ22` is the mean of the two `|A_01|²` brackets.
/// Brackets that couple a coherence to a population, or `A_01` to `A_10`,
/// have no place in a form over `v` and must vanish by the selection rules.
pub fn build_lambda_exact() -> Result<ExactLambda> {
    let table = OverlapTable::shared();
    let b = |n, m, n_p, m_p| table.bracket(n, m, n_p, m_p);
    for (n, m, n_p, m_p) in index_tuples() {
        let coherence = n != m;
        let coherence_p = n_p != m_p;
        let mixes = coherence != coherence_p || (coherence && n != n_p);
        if mixes && !b(n, m, n_p, m_p).is_zero() {
            return Err(Error::Invariant(format!(
                "bracket ({n},{m},{n_p},{m_p}) = {} cannot be expressed in the v basis",
                b(n, m, n_p, m_p)
            )));
        }
    }
    let zero = Rational64::zero();
    let l22 = (b(0, 1, 0, 1) + b(1, 0, 1, 0)) / Rational64::from_integer(2);
    Ok(ExactLambda {
        entries: [[b(0, 0, 0, 0), zero, b(0, 0, 1, 1)], [zero, l22, zero], [b(1, 1, 0, 0), zero, b(1, 1, 1, 1)]],
    })
}

pub fn build_lambda() -> LambdaMatrix {
    build_lambda_exact().expect("overlap table yields a v-basis form").to_f64()
}

pub fn roughness_sq_from_overlaps(state: &SingleQubitState) -> f64 {
    OverlapTable::shared().roughness_sq(state)
}
