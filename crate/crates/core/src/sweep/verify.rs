//! Invariant suite behind the `verify` subcommand.
//!
//! Each property reports how many checks it ran, the worst residual seen and
//! the tolerance it was held to. The verdict passes only if every property does.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::Result;
use crate::linalg::{operator_norm, random, vector_norm, ComplexMatrix};
use crate::povm::{
    block_gram_spectra, build_w_povm, build_z_povm, overlap_report, pair_overlap, povm_validate,
    projector_sqrt_residual, Povm,
};
use crate::walk::{self, walk_operator};
use crate::Complex64;

/// Tolerance for the norm axioms and the trivial bound.
pub const THEOREM_TOL: f64 = 1e-9;
/// Tolerance for walk unitarity, normalization and the projector sqrt shortcut.
pub const UNITARITY_TOL: f64 = 1e-10;
pub const PROJECTIVE_TOL: f64 = 1e-12;
/// Slack allowed between the norm and its best sampled witness.
pub const WITNESS_SLACK: f64 = 1e-6;
const WITNESS_SAMPLES: usize = 1000;
const MATRIX_SIZES: [usize; 6] = [1, 2, 3, 4, 6, 8];

/// What to check. `points` are `(P, T)` walk configurations.
#[derive(Clone, Debug)]
pub struct VerifyGrid {
    pub points: Vec<(usize, usize)>,
    /// Block spectra are full eigensolves, so they only run up to this `P`.
    pub gram_max_positions: usize,
    pub random_matrices: usize,
    pub seed: u64,
    /// Includes the qubit computational-vs-Hadamard anchor.
    pub anchors: bool,
    /// Negative control: overwrite the first W effect with a non-PSD matrix.
    pub corrupt_effect: bool,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        let mut points: Vec<(usize, usize)> =
            [2, 3, 5, 11, 21, 51, 101].iter().map(|&p| (p, p)).collect();
        points.extend((1..=100).step_by(9).map(|t| (101, t)));
        points.sort_unstable();
        points.dedup();
        Self {
            points,
            gram_max_positions: 11,
            random_matrices: 200,
            seed: 0,
            anchors: true,
            corrupt_effect: false,
        }
    }
}

impl VerifyGrid {
    /// Nothing to check; the verdict is vacuous.
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            gram_max_positions: 0,
            random_matrices: 0,
            seed: 0,
            anchors: false,
            corrupt_effect: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First failure, if any.
    pub detail: Option<String>,
}

impl PropertyOutcome {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            checks: 0,
            worst_residual: 0.0,
            tolerance,
            passed: true,
            detail: None,
        }
    }

    /// Records one residual; NaN counts as a failure.
    fn record(&mut self, residual: f64, context: impl FnOnce() -> String) {
        self.checks += 1;
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.worst_residual = self.worst_residual.max(residual);
        if residual > self.tolerance {
            self.fail(format!("{} (residual {residual:.3e})", context()));
        }
    }

    fn fail(&mut self, detail: String) {
        self.passed = false;
        self.detail.get_or_insert(detail);
    }

    pub fn is_vacuous(&self) -> bool {
        self.checks == 0
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub properties: Vec<PropertyOutcome>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn total_checks(&self) -> usize {
        self.properties.iter().map(|p| p.checks).sum()
    }

    pub fn is_vacuous(&self) -> bool {
        self.total_checks() == 0
    }

    pub fn property(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// One line per property, then an overall line.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            let status = match (p.passed, p.is_vacuous()) {
                (true, true) => "PASS (vacuous)",
                (true, false) => "PASS",
                (false, _) => "FAIL",
            };
            out.push_str(&format!(
                "{status:<15} {:<26} checks={:<6} worst={:.3e} tol={:.0e}",
                p.name, p.checks, p.worst_residual, p.tolerance
            ));
            if let Some(d) = &p.detail {
                out.push_str(&format!("  [{d}]"));
            }
            out.push('\n');
        }
        let overall = if self.passed() { "PASS" } else { "FAIL" };
        let vacuous = if self.is_vacuous() { " (vacuous: zero checks)" } else { "" };
        out.push_str(&format!("overall: {overall}{vacuous}, {} checks\n", self.total_checks()));
        out
    }
}

/// Runs every property on the grid. Computation errors become failures of
/// the property that hit them instead of aborting the run.
pub fn verify(grid: &VerifyGrid) -> Verdict {
    let mut properties = norm_axioms(grid);
    properties.extend(walk_properties(grid));
    properties.extend(povm_properties(grid));
    let mut anchor = PropertyOutcome::new("projective_reduction", PROJECTIVE_TOL);
    if grid.anchors {
        match projective_anchor() {
            Ok(c) => anchor.record((c - 0.5).abs(), || "qubit Z vs X".into()),
            Err(e) => anchor.fail(e.to_string()),
        }
    }
    properties.push(anchor);
    Verdict { properties }
}

/// Overlap of the qubit computational and Hadamard bases (exactly 1/2).
pub fn projective_anchor() -> Result<f64> {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let x = Povm::projective(&[vec![s, s], vec![s, -s]])?;
    pair_overlap(&Povm::computational(2)?, &x)
}

fn norm_axioms(grid: &VerifyGrid) -> Vec<PropertyOutcome> {
    let mut positivity = PropertyOutcome::new("norm_positivity", THEOREM_TOL);
    let mut homogeneity = PropertyOutcome::new("norm_homogeneity", THEOREM_TOL);
    let mut subadditivity = PropertyOutcome::new("norm_subadditivity", THEOREM_TOL);
    let mut submult = PropertyOutcome::new("norm_submultiplicativity", THEOREM_TOL);
    let mut invariance = PropertyOutcome::new("norm_unitary_invariance", THEOREM_TOL);
    let mut witness = PropertyOutcome::new("norm_definition", WITNESS_SLACK);

    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    for i in 0..grid.random_matrices {
        let n = MATRIX_SIZES[i % MATRIX_SIZES.len()];
        let a = random::matrix(&mut rng, n, n);
        let b = random::matrix(&mut rng, n, n);
        let s = random::scalar(&mut rng);
        let u = random::unitary(&mut rng, n);
        let v = random::unitary(&mut rng, n);
        let ctx = || format!("matrix #{i}, n = {n}");

        let na = operator_norm(&a);
        let nb = operator_norm(&b);
        let scale = 1.0 + na;
        // A nonzero matrix has a positive norm; the zero matrix has norm 0.
        positivity.record(if na > 0.0 { 0.0 } else { f64::INFINITY }, ctx);
        positivity.record(operator_norm(&ComplexMatrix::zeros(n, n)), ctx);
        homogeneity.record((operator_norm(&a.scale(s)) - s.norm() * na).abs() / scale, ctx);
        let sum = a.checked_add(&b).expect("same shape");
        subadditivity.record((operator_norm(&sum) - na - nb).max(0.0) / (1.0 + na + nb), ctx);
        let prod = a.matmul(&b).expect("same shape");
        submult.record((operator_norm(&prod) - na * nb).max(0.0) / (1.0 + na * nb), ctx);
        let rotated = u.matmul(&a).and_then(|ua| ua.matmul(&v)).expect("same shape");
        invariance.record((operator_norm(&rotated) - na).abs() / scale, ctx);

        // No unit vector beats the norm, and the top right singular vector reaches it.
        let mut best = 0.0_f64;
        let mut exceed = 0.0_f64;
        for _ in 0..WITNESS_SAMPLES {
            let x = random::unit_vector(&mut rng, n);
            let ax = vector_norm(&a.apply(&x).expect("square"));
            exceed = exceed.max(ax - na);
            best = best.max(ax);
        }
        if let Ok(eig) = crate::linalg::hermitian_eig(&a.adjoint().matmul(&a).expect("square")) {
            let top = eig.eigenvectors.column(0);
            best = best.max(vector_norm(&a.apply(&top).expect("square")));
        }
        witness.record(exceed.max(0.0) / scale, ctx);
        witness.record((na - best).max(0.0) / scale, ctx);
    }
    vec![positivity, homogeneity, subadditivity, submult, invariance, witness]
}

fn positions_in(grid: &VerifyGrid) -> Vec<usize> {
    let mut ps: Vec<usize> = grid.points.iter().map(|&(p, _)| p).collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

fn walk_properties(grid: &VerifyGrid) -> Vec<PropertyOutcome> {
    let mut unitarity = PropertyOutcome::new("walk_unitarity", UNITARITY_TOL);
    for p in positions_in(grid) {
        let residual = walk_operator(p).and_then(|w| {
            let id = ComplexMatrix::identity(2 * p);
            Ok(w.adjoint().matmul(&w)?.max_abs_diff(&id).max(w.matmul(&w.adjoint())?.max_abs_diff(&id)))
        });
        match residual {
            Ok(r) => unitarity.record(r, || format!("P = {p}")),
            Err(e) => unitarity.fail(format!("P = {p}: {e}")),
        }
    }
    let mut normalization = PropertyOutcome::new("walk_normalization", UNITARITY_TOL);
    for &(p, t) in &grid.points {
        match walk::honest_state(p, t) {
            Ok(state) => {
                let total: f64 = walk::position_distribution(&state).probs.iter().sum();
                normalization.record((state.norm() - 1.0).abs().max((total - 1.0).abs()), || {
                    format!("P = {p}, T = {t}")
                });
            }
            Err(e) => normalization.fail(format!("P = {p}, T = {t}: {e}")),
        }
    }
    vec![unitarity, normalization]
}

fn povm_properties(grid: &VerifyGrid) -> Vec<PropertyOutcome> {
    let mut validity = PropertyOutcome::new("povm_validity", THEOREM_TOL);
    let mut sqrt_shortcut = PropertyOutcome::new("projector_sqrt_shortcut", UNITARITY_TOL);
    let mut trivial = PropertyOutcome::new("trivial_bound", THEOREM_TOL);
    let mut delta0_gamma = PropertyOutcome::new("delta0_equals_gamma", THEOREM_TOL);
    let mut delta1_one = PropertyOutcome::new("delta1_equals_one", THEOREM_TOL);
    let mut agreement = PropertyOutcome::new("numeric_vs_analytic", THEOREM_TOL);
    let mut spectra = PropertyOutcome::new("block_gram_spectra", THEOREM_TOL);

    for (i, &(p, t)) in grid.points.iter().enumerate() {
        let ctx = || format!("P = {p}, T = {t}");
        let povms = walk::honest_state(p, t).and_then(|state| {
            let mut w = build_w_povm(&state)?;
            if grid.corrupt_effect && i == 0 {
                let bad = w.effects()[0].checked_sub(&ComplexMatrix::identity(2 * p).scale(0.25.into()))?;
                w = w.with_effect(0, bad)?;
            }
            Ok((state, w, build_z_povm(p)?))
        });
        let (state, w, z) = match povms {
            Ok(v) => v,
            Err(e) => {
                validity.fail(format!("{}: {e}", ctx()));
                continue;
            }
        };
        for povm in [&w, &z] {
            let v = povm_validate(povm);
            validity.record(v.worst_hermitian.max(v.worst_negativity).max(v.completeness), ctx);
            if !v.is_valid() {
                validity.fail(format!("{}: {:?}", ctx(), v.violations));
            }
            match projector_sqrt_residual(povm) {
                Ok(r) => sqrt_shortcut.record(r, ctx),
                Err(e) => sqrt_shortcut.fail(format!("{}: {e}", ctx())),
            }
        }

        match overlap_report(p, t) {
            Ok(r) => {
                trivial.record((r.overlap_c - 1.0).abs(), ctx);
                delta0_gamma.record((r.delta0 - r.gamma).abs(), ctx);
                delta1_one.record((r.delta1 - 1.0).abs(), ctx);
                agreement.record(r.max_abs_disagreement, ctx);
            }
            Err(e) => {
                for prop in [&mut trivial, &mut delta0_gamma, &mut delta1_one, &mut agreement] {
                    prop.fail(format!("{}: {e}", ctx()));
                }
            }
        }

        if p <= grid.gram_max_positions {
            for (b, a) in crate::povm::analytic_eigenvalues(&state).iter().enumerate() {
                match block_gram_spectra(&state, b) {
                    Ok((s0, s1)) => {
                        let r0 = spectrum_residual(&s0, &[a.lambda0]);
                        let r1 = spectrum_residual(&s1, &a.lambda1);
                        spectra.record(r0.max(r1), || format!("{}, b = {b}", ctx()));
                    }
                    Err(e) => spectra.fail(format!("{}, b = {b}: {e}", ctx())),
                }
            }
        }
    }
    vec![validity, sqrt_shortcut, trivial, delta0_gamma, delta1_one, agreement, spectra]
}

/// Distance between a descending spectrum and `expected` padded with zeros.
pub fn spectrum_residual(spectrum: &[f64], expected: &[f64]) -> f64 {
    let mut want: Vec<f64> = expected.to_vec();
    want.resize(spectrum.len().max(want.len()), 0.0);
    want.sort_by(|a, b| b.total_cmp(a));
    if want.len() != spectrum.len() {
        return f64::INFINITY;
    }
    spectrum.iter().zip(&want).map(|(s, w)| (s - w).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyGrid {
        VerifyGrid {
            points: vec![(2, 2), (3, 3), (5, 5), (5, 2)],
            gram_max_positions: 5,
            random_matrices: 24,
            ..VerifyGrid::default()
        }
    }

    #[test]
    fn small_grid_passes() {
        let verdict = verify(&small());
        assert!(verdict.passed(), "{}", verdict.summary());
        assert!(!verdict.is_vacuous());
        assert!(verdict.properties.iter().all(|p| p.checks > 0), "{}", verdict.summary());
    }

    #[test]
    fn corrupted_effect_fails_validity_only_there() {
        let verdict = verify(&VerifyGrid { corrupt_effect: true, ..small() });
        assert!(!verdict.passed());
        assert!(!verdict.property("povm_validity").unwrap().passed);
        assert!(verdict.property("trivial_bound").unwrap().passed);
    }

    #[test]
    fn empty_grid_is_vacuous_pass() {
        let verdict = verify(&VerifyGrid::empty());
        assert!(verdict.passed());
        assert!(verdict.is_vacuous());
        assert!(verdict.summary().contains("vacuous"));
    }

    #[test]
    fn default_grid_shape() {
        let g = VerifyGrid::default();
        assert_eq!(g.points.len(), 7 + 12);
        assert!(g.points.contains(&(101, 91)) && g.points.contains(&(2, 2)));
        assert!(g.random_matrices >= 200);
    }

    #[test]
    fn spectrum_residual_pads_zeros() {
        assert_eq!(spectrum_residual(&[0.7, 0.0, 0.0], &[0.7]), 0.0);
        assert!((spectrum_residual(&[1.0, 0.4, 1e-3], &[1.0, 0.4]) - 1e-3).abs() < 1e-15);
        assert!(spectrum_residual(&[1.0], &[1.0, 0.0, 0.5]).is_infinite());
    }

    #[test]
    fn projective_anchor_is_half() {
        assert!((projective_anchor().unwrap() - 0.5).abs() < 1e-12);
    }
}
