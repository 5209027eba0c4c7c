//! Concurrence, Roughness and the complementarity relations.
//!
//! For reduced states `ρ₁`, `ρ₂` with ground populations `z` and `w`:
//!
//! ```text
//! R²(ρᵢ) = [55 + 37 μᵢ − 39 δ(ρᵢ)] / 108,  μ₁ = z(z − 2), μ₂ = w(w − 2)
//!
//! (R²(ρ₁) + R²(ρ₂))/2 + (39/216)[δ(ρ₁) + δ(ρ₂)] = (37/108)(N_e + f_C) − 19/108
//! ```
//!
//! with `N_e = 2 − z − w` and `f_C = (z² + w²)/2`. For pure states
//! `δ(ρ₁) = δ(ρ₂) = C²/2`, which turns the mixed relation into
//! `R₊² + C̃² = Ñ_e + f̃_C − κ` with `C̃² = (39/216) C²`.

use serde::Serialize;

use crate::appendix::LambdaMatrix;
use crate::linalg::{eig_hermitian, kron, sqrt_psd_from, singular_values, ComplexMatrix, Subsystem, PSD_CLIP};
use crate::states::{extract_zw, reduce, SingleQubitState, TwoQubitState};
use crate::{Error, Result};

/// `κ`
pub const KAPPA: f64 = 19.0 / 108.0;
/// Prefactor shared by `Ñ_e` and `f̃_C`.
pub const LOCAL_WEIGHT: f64 = 37.0 / 108.0;
/// Weight of `δ(ρ₁) + δ(ρ₂)` in the combined sum, and of `C²` in `C̃²`.
pub const ENTROPY_WEIGHT: f64 = 39.0 / 216.0;

/// Lower and upper end of the combined sum.
pub const COMBINED_SUM_RANGE: (f64, f64) = (1.0 / 6.0, 55.0 / 108.0);

pub const MIXED_RESIDUAL_TOL: f64 = 1e-10;
pub const PURE_RESIDUAL_TOL: f64 = 1e-9;
const RANGE_TOL: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-10;

/// `ρ̃ = (σy ⊗ σy) ρ* (σy ⊗ σy)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = kron(&ComplexMatrix::pauli_y(), &ComplexMatrix::pauli_y()).expect("2x2 factors");
    &(&yy * &rho.conj()) * &yy
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The `λₖ` (eigenvalues of `√(√ρ ρ̃ √ρ)`) are computed as the singular
/// values of `τ = Wᵀ(σy⊗σy)W`, where `ρ = WW†` comes from the stored
/// spectrum. That keeps them accurate to rounding even when `ρ` is rank
/// deficient, where taking square roots of tiny eigenvalues of `√ρ ρ̃ √ρ`
/// would cost half the digits.
pub fn concurrence(state: &TwoQubitState) -> Result<f64> {
    let eig = state.spectrum();
    let v = &eig.eigenvectors;
    let weights: Vec<f64> = eig.eigenvalues().iter().map(|&p| p.max(0.0).sqrt()).collect();
    let w = ComplexMatrix::from_fn(4, |i, k| v[(i, k)] * weights[k])?;
    let yy = kron(&ComplexMatrix::pauli_y(), &ComplexMatrix::pauli_y())?;
    let tau = ComplexMatrix::from_fn(4, |i, j| {
        // (Wᵀ Y W)_ij; Y is the signed anti-diagonal.
        (0..4).map(|k| w[(k, i)] * yy[(k, 3 - k)] * w[(3 - k, j)]).sum()
    })?;
    let lambda = singular_values(&tau)?;
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// Concurrence through the Hermitian square-root route, `λₖ = √eig(√ρ ρ̃ √ρ)`.
///
/// Kept as an independent cross-check of [`concurrence`]; near rank
/// deficiency it is only accurate to about `1e-8`.
pub fn concurrence_sqrt_route(state: &TwoQubitState) -> Result<f64> {
    let root = sqrt_psd_from(state.spectrum())?;
    let m = &(&root * &spin_flip(state.rho())) * &root;
    let eig = eig_hermitian(&m.symmetrized())?;
    let mut lambda = Vec::with_capacity(4);
    for &l in eig.eigenvalues() {
        if l < -PSD_CLIP {
            return Err(Error::NotPsd(l));
        }
        lambda.push(l.max(0.0).sqrt());
    }
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// `δ = 1 − Tr{ρ²}`.
pub fn linear_entropy(state: &SingleQubitState) -> f64 {
    1.0 - state.purity()
}

/// `R² = 55/108 − (37/108) A_00 (2 − A_00) − (39/108) δ(ρ)`.
pub fn roughness_sq_qubit(state: &SingleQubitState) -> f64 {
    let a00 = state.a00();
    55.0 / 108.0 - 37.0 / 108.0 * a00 * (2.0 - a00) - 39.0 / 108.0 * linear_entropy(state)
}

/// `R² = v†Λv` with the reference `Λ`.
pub fn roughness_sq_quadratic(state: &SingleQubitState) -> f64 {
    LambdaMatrix::reference().quadratic_form(&state.v_vector())
}

fn reduced_pair(state: &TwoQubitState) -> Result<(SingleQubitState, SingleQubitState)> {
    Ok((reduce(state, Subsystem::First)?, reduce(state, Subsystem::Second)?))
}

/// `R₊² = (R²(ρ₁) + R²(ρ₂))/2`.
pub fn r_plus_sq(state: &TwoQubitState) -> Result<f64> {
    let (r1, r2) = reduced_pair(state)?;
    Ok(0.5 * (roughness_sq_qubit(&r1) + roughness_sq_qubit(&r2)))
}

/// `N_e = Tr{(n̂₁ + n̂₂)ρ} = 2 − z − w`.
pub fn excitation_number(state: &TwoQubitState) -> f64 {
    let (z, w) = extract_zw(state);
    2.0 - z - w
}

/// `f_C = (z² + w²)/2`.
pub fn f_c(state: &TwoQubitState) -> f64 {
    let (z, w) = extract_zw(state);
    0.5 * (z * z + w * w)
}

fn combined_lhs(r2: (f64, f64), delta: (f64, f64)) -> f64 {
    0.5 * (r2.0 + r2.1) + ENTROPY_WEIGHT * (delta.0 + delta.1)
}

fn combined_rhs(ne: f64, fc: f64) -> f64 {
    LOCAL_WEIGHT * (ne + fc) - KAPPA
}

/// `(R²(ρ₁) + R²(ρ₂))/2 + (39/216)[δ(ρ₁) + δ(ρ₂)]`, checked against `[1/6, 55/108]`.
pub fn combined_sum_lhs(state: &TwoQubitState) -> Result<f64> {
    let (r1, r2) = reduced_pair(state)?;
    let value = combined_lhs(
        (roughness_sq_qubit(&r1), roughness_sq_qubit(&r2)),
        (linear_entropy(&r1), linear_entropy(&r2)),
    );
    check_combined_range(value)?;
    Ok(value)
}

fn check_combined_range(value: f64) -> Result<()> {
    let (lo, hi) = COMBINED_SUM_RANGE;
    if value < lo - RANGE_TOL || value > hi + RANGE_TOL {
        return Err(Error::Invariant(format!("combined sum {value} outside [1/6, 55/108]")));
    }
    Ok(())
}

/// `|LHS − RHS|` of the mixed-state relation; an identity for every state.
pub fn relation_residual_mixed(state: &TwoQubitState) -> Result<f64> {
    Ok((combined_sum_lhs(state)? - combined_rhs(excitation_number(state), f_c(state))).abs())
}

/// `C̃² = (39/216) C²`.
pub fn rescaled_concurrence_sq(c: f64) -> f64 {
    ENTROPY_WEIGHT * c * c
}

fn pure_residual(rplus2: f64, c: f64, ne: f64, fc: f64) -> f64 {
    (rplus2 + rescaled_concurrence_sq(c) - LOCAL_WEIGHT * ne - LOCAL_WEIGHT * fc + KAPPA).abs()
}

/// `|R₊² + C̃² − Ñ_e − f̃_C + κ|`, defined for pure states only.
pub fn relation_residual_pure(state: &TwoQubitState) -> Result<f64> {
    let purity = state.purity();
    if purity < 1.0 - PURITY_TOL {
        return Err(Error::Precondition(format!("pure-state relation needs purity 1, got {purity}")));
    }
    Ok(pure_residual(r_plus_sq(state)?, concurrence(state)?, excitation_number(state), f_c(state)))
}

/// Every measure of one two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureTuple {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub delta1: f64,
    pub delta2: f64,
    #[serde(rename = "R2_1")]
    pub r2_1: f64,
    #[serde(rename = "R2_2")]
    pub r2_2: f64,
    #[serde(rename = "Rplus2")]
    pub rplus2: f64,
    #[serde(rename = "Ne")]
    pub ne: f64,
    #[serde(rename = "fC")]
    pub fc: f64,
    pub z: f64,
    pub w: f64,
    pub purity: f64,
}

impl MeasureTuple {
    pub fn of(state: &TwoQubitState) -> Result<Self> {
        let (r1, r2) = reduced_pair(state)?;
        let (z, w) = extract_zw(state);
        let c = concurrence(state)?;
        let (r2_1, r2_2) = (roughness_sq_qubit(&r1), roughness_sq_qubit(&r2));
        Ok(MeasureTuple {
            c,
            c2: c * c,
            delta1: linear_entropy(&r1),
            delta2: linear_entropy(&r2),
            r2_1,
            r2_2,
            rplus2: 0.5 * (r2_1 + r2_2),
            ne: 2.0 - z - w,
            fc: 0.5 * (z * z + w * w),
            z,
            w,
            purity: state.purity(),
        })
    }

    pub fn combined_sum(&self) -> f64 {
        combined_lhs((self.r2_1, self.r2_2), (self.delta1, self.delta2))
    }

    /// Same quantity as [`relation_residual_mixed`], from the stored values.
    pub fn residual_mixed(&self) -> f64 {
        (self.combined_sum() - combined_rhs(self.ne, self.fc)).abs()
    }

    /// Same quantity as [`relation_residual_pure`]; `None` unless the state is pure.
    pub fn residual_pure(&self) -> Option<f64> {
        (self.purity >= 1.0 - PURITY_TOL).then(|| pure_residual(self.rplus2, self.c, self.ne, self.fc))
    }

    /// Checks the documented ranges of every field.
    pub fn check_ranges(&self) -> Result<()> {
        let tol = RANGE_TOL;
        let within = |name: &str, x: f64, lo: f64, hi: f64| {
            if x.is_finite() && x >= lo - tol && x <= hi + tol {
                Ok(())
            } else {
                Err(Error::Invariant(format!("{name} = {x} outside [{lo}, {hi}]")))
            }
        };
        within("C", self.c, 0.0, 1.0)?;
        within("delta1", self.delta1, 0.0, 0.5)?;
        within("delta2", self.delta2, 0.0, 0.5)?;
        within("R2_1", self.r2_1, 0.0, 55.0 / 108.0)?;
        within("R2_2", self.r2_2, 0.0, 55.0 / 108.0)?;
        within("Ne", self.ne, 0.0, 2.0)?;
        within("fC", self.fc, 0.0, 1.0)?;
        check_combined_range(self.combined_sum())
    }
}
