//! Validated single- and two-qubit density matrices.
//!
//! A two-qubit state is written `ρ = Σ Ψ_{mm'kk'} |mk⟩⟨m'k'|` with `m, m'`
//! labelling subsystem 1 and `k, k'` subsystem 2; a single-qubit state is
//! `ρ = Σ A_{nn'} |n⟩⟨n'|`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;

use crate::fmt::sig17;
use crate::linalg::{self, eig_hermitian, ComplexMatrix, HermitianEigenSystem, Subsystem, HERMITIAN_TOL, PSD_CLIP};
use crate::rng::SampleRng;
use crate::{Error, Result};

pub const TRACE_TOL: f64 = 1e-12;

/// Eigenvalues above this count toward the rank hint.
pub const RANK_THRESHOLD: f64 = 1e-9;

fn check_density(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = m.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::TraceNotUnit(tr.re));
    }
    let eig = eig_hermitian(m)?;
    if eig.min_eigenvalue() < -PSD_CLIP {
        return Err(Error::NotPsd(eig.min_eigenvalue()));
    }
    Ok(eig)
}

/// 2×2 density matrix with coefficients `A_{nn'}`.
#[derive(Clone, Copy, Debug)]
pub struct SingleQubitState {
    rho: ComplexMatrix,
}

/// The 3-component representation `(A_00, √2·A_01, A_11)`.
///
/// The `√2` is what makes `v†v = Tr{ρ²}` hold; with `A_01/√2` neither the
/// purity identity nor the closed-form Roughness would be reproduced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VVector {
    pub v1: f64,
    pub v2: Complex64,
    pub v3: f64,
}

impl VVector {
    pub fn norm_sqr(&self) -> f64 {
        self.v1 * self.v1 + self.v2.norm_sqr() + self.v3 * self.v3
    }
}

impl SingleQubitState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::InvalidDimension { expected: "2", got: rho.dim() });
        }
        check_density(&rho)?;
        Ok(SingleQubitState { rho })
    }

    /// State with populations `(a00, 1 - a00)` and coherence `a01`.
    pub fn from_coefficients(a00: f64, a01: Complex64) -> Result<Self> {
        let rho = ComplexMatrix::from_rows(&[
            [Complex64::new(a00, 0.0), a01],
            [a01.conj(), Complex64::new(1.0 - a00, 0.0)],
        ])?;
        Self::new(rho)
    }

    /// `|0⟩⟨0|`
    pub fn ground() -> Self {
        Self::from_coefficients(1.0, Complex64::new(0.0, 0.0)).expect("valid")
    }

    /// `|1⟩⟨1|`
    pub fn excited() -> Self {
        Self::from_coefficients(0.0, Complex64::new(0.0, 0.0)).expect("valid")
    }

    /// `|+⟩⟨+|`
    pub fn plus() -> Self {
        Self::from_coefficients(0.5, Complex64::new(0.5, 0.0)).expect("valid")
    }

    /// `I/2`
    pub fn maximally_mixed() -> Self {
        Self::from_coefficients(0.5, Complex64::new(0.0, 0.0)).expect("valid")
    }

    /// Hilbert–Schmidt random qubit: a normalized 2×2 Ginibre Gram matrix.
    pub fn random(seed: u64) -> Self {
        let rho = ginibre_gram(2, 2, &mut SampleRng::from_seed(seed));
        Self::new(rho).expect("Gram matrices are valid states")
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn a00(&self) -> f64 {
        self.rho[(0, 0)].re
    }

    pub fn a01(&self) -> Complex64 {
        self.rho[(0, 1)]
    }

    pub fn a10(&self) -> Complex64 {
        self.rho[(1, 0)]
    }

    pub fn a11(&self) -> f64 {
        self.rho[(1, 1)].re
    }

    pub fn v_vector(&self) -> VVector {
        VVector { v1: self.a00(), v2: self.a01() * std::f64::consts::SQRT_2, v3: self.a11() }
    }

    pub fn purity(&self) -> f64 {
        linalg::purity(&self.rho)
    }
}

/// Validated 4×4 density matrix.
///
/// The eigen-decomposition computed during validation is kept, since the
/// concurrence needs it again.
#[derive(Clone, Copy, Debug)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
    spectrum: HermitianEigenSystem,
    rank_hint: usize,
}

impl TwoQubitState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::InvalidDimension { expected: "4", got: rho.dim() });
        }
        let spectrum = check_density(&rho)?;
        let rank_hint = spectrum.eigenvalues().iter().filter(|&&l| l > RANK_THRESHOLD).count();
        Ok(TwoQubitState { rho, spectrum, rank_hint })
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn spectrum(&self) -> &HermitianEigenSystem {
        &self.spectrum
    }

    /// Number of eigenvalues above [`RANK_THRESHOLD`].
    pub fn rank_hint(&self) -> usize {
        self.rank_hint
    }

    /// `Ψ_{mm'kk'}`, the coefficient of `|mk⟩⟨m'k'|`.
    pub fn psi(&self, m: usize, m_prime: usize, k: usize, k_prime: usize) -> Complex64 {
        assert!(m < 2 && m_prime < 2 && k < 2 && k_prime < 2, "qubit indices are 0 or 1");
        self.rho[(2 * m + k, 2 * m_prime + k_prime)]
    }

    pub fn purity(&self) -> f64 {
        linalg::purity(&self.rho)
    }
}

#[derive(Clone, Copy, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum DensityState {
    Single(SingleQubitState),
    Two(TwoQubitState),
}

/// Checks trace, Hermiticity and positivity and returns the typed state.
pub fn validate_density(m: &ComplexMatrix) -> Result<DensityState> {
    match m.dim() {
        2 => SingleQubitState::new(*m).map(DensityState::Single),
        4 => TwoQubitState::new(*m).map(DensityState::Two),
        d => Err(Error::InvalidDimension { expected: "2 or 4", got: d }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "phi-plus" => Ok(BellKind::PhiPlus),
            "phi-" | "phi-minus" => Ok(BellKind::PhiMinus),
            "psi+" | "psi-plus" => Ok(BellKind::PsiPlus),
            "psi-" | "psi-minus" => Ok(BellKind::PsiMinus),
            _ => Err(Error::Precondition(format!("unknown Bell state {s:?}"))),
        }
    }
}

/// Projector onto a Bell state.
pub fn bell(kind: BellKind) -> TwoQubitState {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let amps = match kind {
        BellKind::PhiPlus => [one, zero, zero, one],
        BellKind::PhiMinus => [one, zero, zero, -one],
        BellKind::PsiPlus => [zero, one, one, zero],
        BellKind::PsiMinus => [zero, one, -one, zero],
    };
    pure_from_amplitudes(amps).expect("Bell amplitudes are nonzero")
}

/// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩` for `|ψ⟩ = c00|00⟩ + c01|01⟩ + c10|10⟩ + c11|11⟩`.
pub fn pure_from_amplitudes(amps: [Complex64; 4]) -> Result<TwoQubitState> {
    let norm_sqr: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if !(norm_sqr > 0.0 && norm_sqr.is_finite()) {
        return Err(Error::Degenerate("amplitudes must have a finite nonzero norm"));
    }
    let rho = ComplexMatrix::from_fn(4, |i, j| amps[i] * amps[j].conj() / norm_sqr)?;
    TwoQubitState::new(rho)
}

/// Haar-random pure state: a normalized complex Gaussian 4-vector.
pub fn haar_random_pure(seed: u64) -> TwoQubitState {
    let mut rng = SampleRng::from_seed(seed);
    loop {
        let amps: [Complex64; 4] = std::array::from_fn(|_| rng.complex_gaussian());
        if amps.iter().map(|c| c.norm_sqr()).sum::<f64>() >= 1e-300 {
            return pure_from_amplitudes(amps).expect("Gaussian projectors are valid states");
        }
    }
}

fn ginibre_gram(dim: usize, rank: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let g: Vec<Complex64> = (0..dim * rank).map(|_| rng.complex_gaussian()).collect();
    let gram = ComplexMatrix::from_fn(dim, |i, j| (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum())
        .expect("dimension is 2 or 4");
    gram.scale(1.0 / gram.trace().re)
}

/// `GG†/Tr{GG†}` with `G` a 4×`rank` matrix of complex standard Gaussians.
///
/// Rank 1 draws the same Gaussian stream as [`haar_random_pure`].
pub fn ginibre_random(rank: usize, seed: u64) -> Result<TwoQubitState> {
    if !(1..=4).contains(&rank) {
        return Err(Error::Precondition(format!("rank must be in 1..=4, got {rank}")));
    }
    let rho = ginibre_gram(4, rank, &mut SampleRng::from_seed(seed));
    TwoQubitState::new(rho)
}

/// Reduced state of one subsystem; for `Second`, `A_00 = Ψ_0000 + Ψ_1100`.
pub fn reduce(state: &TwoQubitState, part: Subsystem) -> Result<SingleQubitState> {
    SingleQubitState::new(linalg::partial_trace(state.rho(), part)?)
}

/// `z = Ψ_0000 + Ψ_0011` and `w = Ψ_0000 + Ψ_1100`: the ground-state
/// populations of the two reduced states.
pub fn extract_zw(state: &TwoQubitState) -> (f64, f64) {
    let z = state.psi(0, 0, 0, 0).re + state.psi(0, 0, 1, 1).re;
    let w = state.psi(0, 0, 0, 0).re + state.psi(1, 1, 0, 0).re;
    (z.clamp(0.0, 1.0), w.clamp(0.0, 1.0))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Serializes as `{"dim": n, "matrix": [[[re, im], ...], ...]}` with
/// 17 significant digits.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = m
        .rows()
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|z| format!("[{}, {}]", sig17(z.re), sig17(z.im))).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("{{\"dim\": {}, \"matrix\": [{}]}}", m.dim(), rows.join(", "))
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.matrix.len() != file.dim || file.matrix.iter().any(|r| r.len() != file.dim) {
        return Err(Error::Format(format!("\"matrix\" is not {0}x{0} as declared by \"dim\"", file.dim)));
    }
    let rows: Vec<Vec<Complex64>> =
        file.matrix.iter().map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}

/// Reads and validates a state file.
pub fn read_state_file(path: impl AsRef<Path>) -> Result<DensityState> {
    let text = fs::read_to_string(path)?;
    validate_density(&matrix_from_json(&text)?)
}

pub fn write_state_file(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(m) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(d).unwrap()
    }

    #[test]
    fn validate_examples() {
        match validate_density(&diag(&[0.25; 4])).unwrap() {
            DensityState::Two(s) => assert_eq!(s.rank_hint(), 4),
            DensityState::Single(_) => panic!("wrong dimension"),
        }
        assert!(matches!(validate_density(&diag(&[1.1, -0.1, 0.0, 0.0])), Err(Error::NotPsd(_))));
        match validate_density(bell(BellKind::PhiPlus).rho()).unwrap() {
            DensityState::Two(s) => assert_eq!(s.rank_hint(), 1),
            DensityState::Single(_) => panic!("wrong dimension"),
        }
        assert!(matches!(validate_density(&diag(&[0.5, 0.6])), Err(Error::TraceNotUnit(_))));
        let mut m = diag(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1);
        assert!(matches!(validate_density(&m), Err(Error::NotHermitian(_))));
        assert!(matches!(validate_density(&diag(&[0.5, 0.5])).unwrap(), DensityState::Single(_)));
    }

    #[test]
    fn bell_states() {
        let phi = bell(BellKind::PhiPlus);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((phi.rho()[(i, j)] - c(0.5)).norm() < 1e-15);
        }
        let psi = bell(BellKind::PsiPlus);
        for i in 0..4 {
            for j in 0..4 {
                if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
                    assert_eq!(psi.rho()[(i, j)].norm(), 0.0);
                }
            }
        }
        for kind in BellKind::ALL {
            assert!((bell(kind).purity() - 1.0).abs() < 1e-15);
        }
        assert_eq!("psi-".parse::<BellKind>().unwrap(), BellKind::PsiMinus);
        assert!("chi".parse::<BellKind>().is_err());
    }

    #[test]
    fn pure_from_amplitude_examples() {
        let zero = c(0.0);
        let s = pure_from_amplitudes([c(1.0), zero, zero, zero]).unwrap();
        assert_eq!(*s.rho(), diag(&[1.0, 0.0, 0.0, 0.0]));
        let s = pure_from_amplitudes([c(1.0), zero, zero, c(1.0)]).unwrap();
        assert!(s.rho().max_abs_diff(bell(BellKind::PhiPlus).rho()) < 1e-15);
        let s = pure_from_amplitudes([c(0.6), zero, zero, c(0.8)]).unwrap();
        let (z, w) = extract_zw(&s);
        assert!((z - 0.36).abs() < 1e-15 && (w - 0.36).abs() < 1e-15);
        assert!(matches!(pure_from_amplitudes([zero; 4]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reduce_examples() {
        let zero = c(0.0);
        let r = reduce(&bell(BellKind::PhiPlus), Subsystem::First).unwrap();
        assert!((r.a00() - 0.5).abs() < 1e-15);
        assert_eq!(r.a01().norm(), 0.0);

        let p01 = pure_from_amplitudes([zero, c(1.0), zero, zero]).unwrap();
        assert_eq!(*reduce(&p01, Subsystem::First).unwrap().rho(), diag(&[1.0, 0.0]));
        assert_eq!(*reduce(&p01, Subsystem::Second).unwrap().rho(), diag(&[0.0, 1.0]));

        let s = pure_from_amplitudes([c(0.6), zero, zero, c(0.8)]).unwrap();
        let r = reduce(&s, Subsystem::First).unwrap();
        assert!(r.rho().max_abs_diff(&diag(&[0.36, 0.64])) < 1e-15);
    }

    #[test]
    fn zw_examples() {
        let zero = c(0.0);
        let s00 = pure_from_amplitudes([c(1.0), zero, zero, zero]).unwrap();
        assert_eq!(extract_zw(&s00), (1.0, 1.0));
        let s11 = pure_from_amplitudes([zero, zero, zero, c(1.0)]).unwrap();
        assert_eq!(extract_zw(&s11), (0.0, 0.0));
        let (z, w) = extract_zw(&bell(BellKind::PhiPlus));
        assert!((z - 0.5).abs() < 1e-15 && (w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_view_indexing() {
        // |01⟩⟨10| sits at Ψ_{m=0,m'=1,k=1,k'=0}
        let mut m = diag(&[0.25; 4]);
        m[(1, 2)] = Complex64::new(0.1, 0.2);
        m[(2, 1)] = Complex64::new(0.1, -0.2);
        let s = TwoQubitState::new(m).unwrap();
        assert_eq!(s.psi(0, 1, 1, 0), Complex64::new(0.1, 0.2));
    }

    #[test]
    fn haar_is_deterministic_and_pure() {
        let a = haar_random_pure(17);
        let b = haar_random_pure(17);
        assert_eq!(a.rho(), b.rho());
        assert_ne!(a.rho(), haar_random_pure(18).rho());
        for seed in 0..100 {
            assert!((haar_random_pure(seed).purity() - 1.0).abs() < 1e-12);
        }
        assert!(ginibre_random(1, 17).unwrap().rho().max_abs_diff(a.rho()) < 1e-15);
    }

    #[test]
    fn haar_mean_reduced_purity() {
        // E Tr{ρ₁²} = (2 + 2)/(2·2 + 1) = 0.8 for Haar states on C²⊗C²;
        // an independent numpy sampler gave 0.8007 at 10⁴ draws.
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|i| reduce(&haar_random_pure(crate::rng::derive_seed(3, i)), Subsystem::First).unwrap().purity())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.8).abs() < 0.01, "mean reduced purity {mean}");
    }

    #[test]
    fn ginibre_ranks() {
        for seed in 0..50 {
            assert!((ginibre_random(1, seed).unwrap().purity() - 1.0).abs() < 1e-12);
            assert_eq!(ginibre_random(2, seed).unwrap().rank_hint(), 2);
            assert_eq!(ginibre_random(3, seed).unwrap().rank_hint(), 3);
            assert_eq!(ginibre_random(4, seed).unwrap().rank_hint(), 4);
        }
        assert!(ginibre_random(0, 1).is_err());
        assert!(ginibre_random(5, 1).is_err());
    }

    #[test]
    fn ginibre_rank4_mean_purity() {
        // E Tr{ρ²} = (N + K)/(NK + 1) = 8/17 for N = K = 4; the numpy pilot gave 0.4704.
        let n = 10_000;
        let mean: f64 =
            (0..n).map(|i| ginibre_random(4, crate::rng::derive_seed(5, i)).unwrap().purity()).sum::<f64>() / n as f64;
        assert!((mean - 8.0 / 17.0).abs() < 0.02, "mean purity {mean}");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = ginibre_random(3, 11).unwrap();
        let text = matrix_to_json(s.rho());
        assert!(text.starts_with("{\"dim\": 4, \"matrix\": [[["));
        assert_eq!(matrix_from_json(&text).unwrap(), *s.rho());

        let three = r#"{"dim": 3, "matrix": [[[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]]}"#;
        assert!(matches!(matrix_from_json(three), Err(Error::InvalidDimension { got: 3, .. })));
        assert!(matches!(matrix_from_json(r#"{"dim": 2, "matrix": [[[1,0]]]}"#), Err(Error::Format(_))));
        assert!(matches!(matrix_from_json("not json"), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn v_vector_norm_is_purity(seed in any::<u64>()) {
            let q = SingleQubitState::random(seed);
            prop_assert!((q.v_vector().norm_sqr() - q.purity()).abs() <= 1e-12);
        }

        #[test]
        fn sampled_states_validate(seed in any::<u64>(), rank in 1usize..=4) {
            let s = ginibre_random(rank, seed).unwrap();
            prop_assert!(validate_density(s.rho()).is_ok());
            let (z, w) = extract_zw(&s);
            let r1 = reduce(&s, Subsystem::First).unwrap();
            let r2 = reduce(&s, Subsystem::Second).unwrap();
            prop_assert!((z - r1.a00()).abs() <= 1e-12);
            prop_assert!((w - r2.a00()).abs() <= 1e-12);
        }

        #[test]
        fn pure_reduced_entropies_agree(seed in any::<u64>()) {
            let s = haar_random_pure(seed);
            let d1 = 1.0 - reduce(&s, Subsystem::First).unwrap().purity();
            let d2 = 1.0 - reduce(&s, Subsystem::Second).unwrap().purity();
            prop_assert!((d1 - d2).abs() <= 1e-10);
        }
    }
}
