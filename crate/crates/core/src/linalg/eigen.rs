//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::{matmul, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Entrywise tolerance on `|M - M*|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Negative eigenvalues down to `-PSD_CLAMP_TOL` are treated as roundoff.
pub const PSD_CLAMP_TOL: f64 = 1e-9;

/// Off-diagonal Frobenius mass, relative to `||M||_F`, at which Jacobi stops.
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues this small relative to the spectral radius count as zero in `psd_sqrt`.
const ZERO_EIGENVALUE_RTOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Spectrum of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenResult {
    /// `U diag(f(lambda)) U*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(u.rows(), u.cols(), |i, j| {
            u[(i, j)] * f(self.eigenvalues[j])
        });
        matmul(&scaled, &u.adjoint()).expect("square eigenvector matrix")
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(M + M*)/2` first. Fails if `M` is not square
/// or deviates from Hermitian by more than [`HERMITIAN_TOL`] in any entry.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }

    let n = m.rows();
    let mut a: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        })
        .collect();
    let mut v = ComplexMatrix::identity(n);

    let scale = m.frobenius_norm();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= OFF_DIAGONAL_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > OFF_DIAGONAL_TOL * scale {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a PSD matrix through its spectral decomposition.
///
/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let smallest = *eig.eigenvalues.last().expect("non-empty spectrum");
    if smallest < -PSD_CLAMP_TOL {
        return Err(Error::NotPsd {
            eigenvalue: smallest,
        });
    }
    let radius = eig.eigenvalues[0].abs().max(smallest.abs());
    let cutoff = ZERO_EIGENVALUE_RTOL * radius;
    Ok(eig.reconstruct_with(|x| if x <= cutoff { 0.0 } else { x.sqrt() }))
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-i phi}) R(theta)`
/// acting on coordinates `p, q`, then accumulates `G` into `v`.
fn rotate(a: &mut [Complex64], v: &mut ComplexMatrix, n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let phase = apq / g;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    // A <- A G
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * g_pp + akq * g_qp;
        a[k * n + q] = akp * g_pq + akq * g_qq;
    }
    // A <- G* A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}
