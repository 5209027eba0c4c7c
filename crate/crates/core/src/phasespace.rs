//! Grid-integration oracle for Roughness.
//!
//! Roughness is the phase-space distance
//! `R = √(2π ∫ dq dp |W(q,p) − Q(q,p)|²)` between the Wigner and Husimi
//! functions. This module evaluates both on a uniform lattice for states
//! supported on Fock levels 0 and 1 and integrates with composite Simpson
//! weights, giving a check on the closed form that shares no algebra with it.
//!
//! Convention (`ħ = 1`, `α = (q + ip)/√2`, `r² = q² + p²`):
//!
//! ```text
//! W(q,p) = e^{-r²}/π   · [A00 + A11 (2r² − 1) + 2√2 Re(A01 (q + ip))]
//! Q(q,p) = e^{-r²/2}/2π · [A00 + A11 r²/2   + 2   Re(A01 α)]
//! ```
//!
//! Both integrate to 1 over `dq dp`. With this scaling the vacuum has
//! `W(0,0) = 1/π` and `Q(0,0) = 1/(2π)`, and the overlap integrals reproduce
//! the matrix `Λ` of [`crate::appendix`] exactly.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use rayon::prelude::*;

use crate::fmt::sig17;
use crate::measures::roughness_sq_qubit;
use crate::rng::derive_seed;
use crate::states::SingleQubitState;
use crate::{Error, Result};

pub const DEFAULT_HALF_WIDTH: f64 = 7.0;
pub const DEFAULT_POINTS: usize = 512;
pub const MIN_POINTS: usize = 64;

/// Agreement required between numeric and closed-form `R²`.
pub const ORACLE_TOL: f64 = 2e-4;

const COVERAGE_TOL: f64 = 1e-4;
const BATTERY_SEED: u64 = 0x05ee_d0f0_ac1e;
const BATTERY_RANDOM: u64 = 20;

/// Symmetric square box `[-L, L]²` sampled at `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    half_width: f64,
    points_per_axis: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        PhaseSpaceGrid { half_width: DEFAULT_HALF_WIDTH, points_per_axis: DEFAULT_POINTS }
    }
}

impl PhaseSpaceGrid {
    pub fn new(half_width: f64, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < MIN_POINTS {
            return Err(Error::Precondition(format!("need at least {MIN_POINTS} points per axis, got {points_per_axis}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Precondition(format!("half width must be positive, got {half_width}")));
        }
        Ok(PhaseSpaceGrid { half_width, points_per_axis })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn q_range(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    pub fn p_range(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// 1-D quadrature weights: composite Simpson, closing with a 3/8 panel
    /// when the interval count is odd.
    pub fn weights(&self) -> Vec<f64> {
        simpson_weights(self.points_per_axis, self.spacing())
    }
}

pub fn simpson_weights(points: usize, h: f64) -> Vec<f64> {
    let intervals = points - 1;
    let mut w = vec![0.0; points];
    let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let j = simpson_end;
        for (k, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
            w[j + k] += c * h / 8.0;
        }
    }
    w
}

/// Real-valued samples on a grid, row-major with `q` as the slow index.
#[derive(Clone, Debug)]
pub struct PhaseSpaceField {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
}

impl PhaseSpaceField {
    fn tabulate(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let n = grid.points_per_axis;
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let q = grid.coordinate(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(q, grid.coordinate(j));
            }
        });
        PhaseSpaceField { grid, values }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.points_per_axis + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `∫ dq dp f` by the tensor-product rule.
    pub fn integral(&self) -> f64 {
        integrate(&self.grid, |k| self.values[k])
    }

    /// Writes `q,p,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "q,p,value")?;
        let n = self.grid.points_per_axis;
        for i in 0..n {
            let q = sig17(self.grid.coordinate(i));
            for j in 0..n {
                writeln!(out, "{},{},{}", q, sig17(self.grid.coordinate(j)), sig17(self.value(i, j)))?;
            }
        }
        Ok(())
    }

    fn check_coverage(self) -> Result<Self> {
        let err = (self.integral() - 1.0).abs();
        if err > COVERAGE_TOL {
            return Err(Error::GridCoverage(err));
        }
        Ok(self)
    }
}

fn integrate(grid: &PhaseSpaceGrid, value: impl Fn(usize) -> f64 + Sync) -> f64 {
    let n = grid.points_per_axis;
    let w = grid.weights();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| w[i] * (0..n).map(|j| w[j] * value(i * n + j)).sum::<f64>())
        .collect();
    rows.iter().sum()
}

fn wigner_at(state: &SingleQubitState, q: f64, p: f64) -> f64 {
    let r2 = q * q + p * p;
    let coherence = (state.a01() * num_complex::Complex64::new(q, p)).re;
    (-r2).exp() / PI * (state.a00() + state.a11() * (2.0 * r2 - 1.0) + 2.0 * SQRT_2 * coherence)
}

fn husimi_at(state: &SingleQubitState, q: f64, p: f64) -> f64 {
    let r2 = q * q + p * p;
    let coherence = (state.a01() * num_complex::Complex64::new(q, p)).re / SQRT_2;
    (-0.5 * r2).exp() / (2.0 * PI) * (state.a00() + state.a11() * 0.5 * r2 + 2.0 * coherence)
}

/// Wigner function on the grid; fails if the grid misses more than `1e-4` of its mass.
pub fn wigner_qubit(state: &SingleQubitState, grid: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let s = *state;
    PhaseSpaceField::tabulate(*grid, move |q, p| wigner_at(&s, q, p)).check_coverage()
}

/// Husimi function on the grid, with the same coverage check.
pub fn husimi_qubit(state: &SingleQubitState, grid: &PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let s = *state;
    PhaseSpaceField::tabulate(*grid, move |q, p| husimi_at(&s, q, p)).check_coverage()
}

/// `2π ∫ |W − Q|²` on the grid.
pub fn roughness_sq_numeric(state: &SingleQubitState, grid: &PhaseSpaceGrid) -> Result<f64> {
    let w = wigner_qubit(state, grid)?;
    let q = husimi_qubit(state, grid)?;
    let sq = integrate(grid, |k| {
        let d = w.values[k] - q.values[k];
        d * d
    });
    Ok(2.0 * PI * sq)
}

pub fn roughness_numeric(state: &SingleQubitState, grid: &PhaseSpaceGrid) -> Result<f64> {
    Ok(roughness_sq_numeric(state, grid)?.sqrt())
}

/// The fixed check set: `|0⟩`, `|1⟩`, `|+⟩`, `I/2` and 20 seeded random qubits.
pub fn oracle_battery() -> Vec<(String, SingleQubitState)> {
    let mut battery = vec![
        ("|0>".to_string(), SingleQubitState::ground()),
        ("|1>".to_string(), SingleQubitState::excited()),
        ("|+>".to_string(), SingleQubitState::plus()),
        ("I/2".to_string(), SingleQubitState::maximally_mixed()),
    ];
    battery.extend(
        (0..BATTERY_RANDOM).map(|i| (format!("random#{i}"), SingleQubitState::random(derive_seed(BATTERY_SEED, i)))),
    );
    battery
}

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub label: String,
    pub closed_form: f64,
    pub numeric: f64,
}

impl OracleRow {
    pub fn error(&self) -> f64 {
        (self.numeric - self.closed_form).abs()
    }

    pub fn passes(&self) -> bool {
        self.error() <= ORACLE_TOL
    }
}

/// Numeric against closed-form `R²` for every battery state.
pub fn run_oracle(grid: &PhaseSpaceGrid) -> Result<Vec<OracleRow>> {
    oracle_battery()
        .into_iter()
        .map(|(label, state)| {
            Ok(OracleRow { label, closed_form: roughness_sq_qubit(&state), numeric: roughness_sq_numeric(&state, grid)? })
        })
        .collect()
}
