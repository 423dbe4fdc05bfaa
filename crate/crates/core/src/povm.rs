//! POVMs, their validation, and overlaps between pairs of POVMs.
//!
//! The two measurements of interest act on a walk state `|w0>` of dimension
//! `2P`:
//!
//! - `W = {W0, W1} = {|w0><w0|, I - |w0><w0|}`
//! - `Z = {Z_j} = {I_C (x) |j><j|}` for `j = 0..P`
//!
//! The overlap `c(X, Z) = max_{a,b} ||sqrt(X_a) sqrt(Z_b)||^2` is computed on
//! the general path (spectral square roots, operator norms). For `(W, Z)` the
//! per-position values also have closed forms, `lambda0(b) = |alpha_b|^2 +
//! |beta_b|^2` for `W0 Z_b` and the spectrum `{1, 1 - lambda0(b)}` for
//! `W1 Z_b`, which [`overlap_report`] cross-checks against the numerics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, matmul, operator_norm, psd_sqrt, ComplexMatrix, HERMITIAN_TOL, PSD_CLAMP_TOL,
};
use crate::walk::{self, flat_index, Coin, WalkState, NORM_TOL};

/// Entrywise tolerance for `sum_k E_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Numeric-vs-analytic disagreement that aborts [`overlap_report`].
pub const CONSISTENCY_ABORT_TOL: f64 = 1e-6;

/// An ordered list of effects on a common dimension.
///
/// Construction only checks shapes; use [`povm_validate`] for the POVM axioms.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::invalid("a POVM needs at least one effect"))?;
        let dim = first.rows();
        if let Some((k, bad)) = effects
            .iter()
            .enumerate()
            .find(|(_, e)| e.shape() != (dim, dim))
        {
            return Err(Error::invalid(format!(
                "effect {k} has shape {:?}, expected {dim}x{dim}",
                bad.shape()
            )));
        }
        Ok(Self { dim, effects })
    }

    /// Projective measurement onto the given orthonormal vectors.
    pub fn projective(basis: &[Vec<Complex64>]) -> Result<Self> {
        Self::new(basis.iter().map(|v| ComplexMatrix::outer(v)).collect())
    }

    /// Computational-basis measurement `{|i><i|}`.
    pub fn computational(dim: usize) -> Result<Self> {
        let basis: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self::projective(&basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Replaces one effect; used to inject faults in validation checks.
    pub fn with_effect(mut self, index: usize, effect: ComplexMatrix) -> Result<Self> {
        if index >= self.effects.len() || effect.shape() != (self.dim, self.dim) {
            return Err(Error::invalid("replacement effect index or shape out of range"));
        }
        self.effects[index] = effect;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PovmViolation {
    NonHermitian { effect: usize, deviation: f64 },
    NotPsd { effect: usize, min_eigenvalue: f64 },
    Incomplete { deviation: f64 },
}

/// Outcome of [`povm_validate`]; empty `violations` means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PovmVerdict {
    pub violations: Vec<PovmViolation>,
    /// Worst Hermiticity, negativity and completeness residuals seen.
    pub worst_hermitian: f64,
    pub worst_negativity: f64,
    pub completeness: f64,
}

impl PovmVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks Hermiticity, positivity and completeness of every effect.
pub fn povm_validate(povm: &Povm) -> PovmVerdict {
    let mut verdict = PovmVerdict::default();
    for (k, effect) in povm.effects.iter().enumerate() {
        let deviation = effect.hermitian_deviation();
        verdict.worst_hermitian = verdict.worst_hermitian.max(deviation);
        if deviation > HERMITIAN_TOL {
            verdict.violations.push(PovmViolation::NonHermitian {
                effect: k,
                deviation,
            });
            continue;
        }
        let eig = hermitian_eig(effect).expect("Hermitian within tolerance");
        let min = *eig.eigenvalues.last().expect("non-empty");
        verdict.worst_negativity = verdict.worst_negativity.max(-min);
        if min < -PSD_CLAMP_TOL {
            verdict.violations.push(PovmViolation::NotPsd {
                effect: k,
                min_eigenvalue: min,
            });
        }
    }
    let mut sum = ComplexMatrix::zeros(povm.dim, povm.dim);
    for effect in &povm.effects {
        sum = sum.checked_add(effect).expect("shapes checked at construction");
    }
    let deviation = sum.max_abs_diff(&ComplexMatrix::identity(povm.dim));
    verdict.completeness = deviation;
    if deviation > COMPLETENESS_TOL {
        verdict
            .violations
            .push(PovmViolation::Incomplete { deviation });
    }
    verdict
}

/// `W = {|w0><w0|, I - |w0><w0|}` for a normalized walk state.
pub fn build_w_povm(state: &WalkState) -> Result<Povm> {
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid(format!("state norm {norm} is not 1")));
    }
    let w0 = ComplexMatrix::outer(state.amplitudes());
    let w1 = ComplexMatrix::identity(state.dim()).checked_sub(&w0)?;
    Povm::new(vec![w0, w1])
}

/// `Z = {I_C (x) |j><j|}` for `j = 0..P`.
pub fn build_z_povm(positions: usize) -> Result<Povm> {
    if positions < 2 {
        return Err(Error::invalid(format!("need P >= 2 positions, got {positions}")));
    }
    let dim = 2 * positions;
    let effects = (0..positions)
        .map(|j| {
            let mut diag = vec![0.0; dim];
            diag[flat_index(Coin::Zero, j, positions)] = 1.0;
            diag[flat_index(Coin::One, j, positions)] = 1.0;
            ComplexMatrix::from_diagonal(&diag)
        })
        .collect();
    Povm::new(effects)
}

/// `table[a][b] = ||sqrt(A_a) sqrt(B_b)||^2` over all effect pairs.
pub fn overlap_table(a: &Povm, b: &Povm) -> Result<Vec<Vec<f64>>> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            op: "overlap",
            left: (a.dim, a.dim),
            right: (b.dim, b.dim),
        });
    }
    let roots_a = a
        .effects
        .par_iter()
        .map(psd_sqrt)
        .collect::<Result<Vec<_>>>()?;
    let roots_b = b
        .effects
        .par_iter()
        .map(psd_sqrt)
        .collect::<Result<Vec<_>>>()?;
    roots_a
        .iter()
        .map(|ra| {
            roots_b
                .par_iter()
                .map(|rb| Ok(operator_norm(&matmul(ra, rb)?).powi(2)))
                .collect()
        })
        .collect()
}

/// `c(A, B) = max_{a,b} ||sqrt(A_a) sqrt(B_b)||^2`.
pub fn pair_overlap(a: &Povm, b: &Povm) -> Result<f64> {
    Ok(overlap_table(a, b)?
        .into_iter()
        .flatten()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest value and lowest index attaining it.
fn arg_max(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

fn walk_overlap_rows(state: &WalkState) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = build_w_povm(state)?;
    let z = build_z_povm(state.positions())?;
    let mut table = overlap_table(&w, &z)?;
    let w1_row = table.pop().expect("two rows");
    let w0_row = table.pop().expect("two rows");
    Ok((w0_row, w1_row))
}

/// `delta0 = max_b ||sqrt(W0) sqrt(Z_b)||^2`.
pub fn delta0(state: &WalkState) -> Result<f64> {
    Ok(arg_max(&walk_overlap_rows(state)?.0).1)
}

/// `delta1 = max_b ||sqrt(W1) sqrt(Z_b)||^2`.
pub fn delta1(state: &WalkState) -> Result<f64> {
    Ok(arg_max(&walk_overlap_rows(state)?.1).1)
}

/// Closed-form spectra at one position `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticEigenvalues {
    pub position: usize,
    /// Only nonzero eigenvalue of `A_b* A_b`, `A_b = W0 Z_b`.
    pub lambda0: f64,
    /// Nonzero-block eigenvalues of `B_b* B_b`, `B_b = W1 Z_b`: `{1, 1 - lambda0}`.
    pub lambda1: [f64; 2],
}

impl AnalyticEigenvalues {
    pub fn lambda1_max(&self) -> f64 {
        self.lambda1[0].max(self.lambda1[1])
    }
}

pub fn analytic_eigenvalues(state: &WalkState) -> Vec<AnalyticEigenvalues> {
    (0..state.positions())
        .map(|b| {
            let lambda0 = state.alpha(b).norm_sqr() + state.beta(b).norm_sqr();
            AnalyticEigenvalues {
                position: b,
                lambda0,
                lambda1: [1.0, 1.0 - lambda0],
            }
        })
        .collect()
}

/// Full descending spectra of `A_b* A_b` and `B_b* B_b`, formed explicitly
/// with the projector products `A_b = W0 Z_b`, `B_b = W1 Z_b`.
pub fn block_gram_spectra(state: &WalkState, b: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if b >= state.positions() {
        return Err(Error::invalid(format!("position {b} out of range")));
    }
    let w = build_w_povm(state)?;
    let z = build_z_povm(state.positions())?;
    let zb = &z.effects[b];
    let spectrum = |effect: &ComplexMatrix| -> Result<Vec<f64>> {
        let prod = matmul(effect, zb)?;
        let gram = matmul(&prod.adjoint(), &prod)?;
        Ok(hermitian_eig(&gram)?.eigenvalues)
    };
    Ok((spectrum(&w.effects[0])?, spectrum(&w.effects[1])?))
}

/// Largest `|sqrt(E) - E|` entry over all effects; zero for exact projectors.
pub fn projector_sqrt_residual(povm: &Povm) -> Result<f64> {
    povm.effects
        .iter()
        .map(|e| Ok(psd_sqrt(e)?.max_abs_diff(e)))
        .try_fold(0.0_f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOverlap {
    pub position: usize,
    /// `||sqrt(W0) sqrt(Z_b)||^2`
    pub w0: f64,
    /// `||sqrt(W1) sqrt(Z_b)||^2`
    pub w1: f64,
}

/// Overlap of `(W, Z)` for one walk state, numeric and analytic side by side.
#[derive(Clone, Debug)]
pub struct OverlapReport {
    pub positions: usize,
    pub steps: usize,
    pub start: (Coin, usize),
    pub gamma: f64,
    pub delta0: f64,
    /// Lowest `b` attaining `delta0`.
    pub delta0_position: usize,
    pub delta1: f64,
    pub delta1_position: usize,
    /// `max(delta0, delta1)`, numeric.
    pub overlap_c: f64,
    /// Same maximum taken over the closed-form eigenvalues.
    pub analytic_overlap_c: f64,
    pub per_b_numeric: Vec<NumericOverlap>,
    pub per_b_analytic: Vec<AnalyticEigenvalues>,
    pub max_abs_disagreement: f64,
}

/// Report for the honest state `W^T |0,0>`.
pub fn overlap_report(positions: usize, steps: usize) -> Result<OverlapReport> {
    overlap_report_from(Coin::Zero, 0, positions, steps)
}

/// Report for `W^T |coin, position>`.
pub fn overlap_report_from(
    coin: Coin,
    position: usize,
    positions: usize,
    steps: usize,
) -> Result<OverlapReport> {
    let state = walk::evolve(coin, position, positions, steps)?;
    let (w0_row, w1_row) = walk_overlap_rows(&state)?;
    let per_b_analytic = analytic_eigenvalues(&state);
    let per_b_numeric: Vec<NumericOverlap> = w0_row
        .iter()
        .zip(&w1_row)
        .enumerate()
        .map(|(position, (&w0, &w1))| NumericOverlap { position, w0, w1 })
        .collect();

    let max_abs_disagreement = per_b_numeric
        .iter()
        .zip(&per_b_analytic)
        .map(|(n, a)| (n.w0 - a.lambda0).abs().max((n.w1 - a.lambda1_max()).abs()))
        .fold(0.0, f64::max);
    if max_abs_disagreement > CONSISTENCY_ABORT_TOL {
        return Err(Error::Consistency {
            context: format!("P = {positions}, T = {steps}"),
            disagreement: max_abs_disagreement,
        });
    }

    let (delta0_position, delta0) = arg_max(&w0_row);
    let (delta1_position, delta1) = arg_max(&w1_row);
    let analytic_overlap_c = per_b_analytic
        .iter()
        .map(|a| a.lambda0.max(a.lambda1_max()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(OverlapReport {
        positions,
        steps,
        start: (coin, position),
        gamma: walk::gamma(&state),
        delta0,
        delta0_position,
        delta1,
        delta1_position,
        overlap_c: delta0.max(delta1),
        analytic_overlap_c,
        per_b_numeric,
        per_b_analytic,
        max_abs_disagreement,
    })
}
