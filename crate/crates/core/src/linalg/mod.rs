//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] stores entries row-major. Everything here is a pure
//! function of its inputs; no operation mutates its arguments.

mod eigen;
pub mod random;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{hermitian_eig, psd_sqrt, EigenResult, HERMITIAN_TOL, PSD_CLAMP_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major, at least 1x1.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    /// Square diagonal matrix with the given real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "apply",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `M - M*`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix product `A * B`.
///
/// Zero entries of `A` and all-zero rows of `B` are skipped, so products with
/// projectors onto a few basis vectors cost O(n^2) rather than O(n^3).
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (n, m) = (a.rows, b.cols);
    let b_row_nonzero: Vec<bool> = b
        .data
        .chunks_exact(m)
        .map(|row| row.iter().any(|z| z.re != 0.0 || z.im != 0.0))
        .collect();
    let mut out = vec![ZERO; n * m];
    for i in 0..n {
        let out_row = &mut out[i * m..(i + 1) * m];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if !b_row_nonzero[k] || (aik.re == 0.0 && aik.im == 0.0) {
                continue;
            }
            let b_row = &b.data[k * m..(k + 1) * m];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix {
        rows: n,
        cols: m,
        data: out,
    })
}

/// Kronecker product, `A` index major and `B` index minor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Operator norm: the largest singular value, `sqrt(lambda_max(A* A))`.
///
/// Always goes through `A* A` (cols x cols), also for non-square input.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let gram = matmul(&a.adjoint(), a).expect("A* A is always conformable");
    let eig = hermitian_eig(&gram).expect("A* A is Hermitian by construction");
    eig.eigenvalues[0].max(0.0).sqrt()
}

/// Euclidean norm of a vector.
pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = ZERO;
                for k in 0..a.cols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn rejects_empty_and_short_data() {
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn identity_times_x_is_x() {
        let x = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(-0.5, 0.0)], vec![c(0.0, 3.0), c(4.0, -1.0)]])
            .unwrap();
        assert_eq!(matmul(&ComplexMatrix::identity(2), &x).unwrap(), x);
    }

    #[test]
    fn product_with_zero_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random::matrix(&mut rng, 3, 4);
        assert!(matmul(&a, &ComplexMatrix::zeros(4, 2)).unwrap().is_zero());
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random::matrix(&mut rng, 3, 3);
            let b = random::matrix(&mut rng, 3, 3);
            let fast = matmul(&a, &b).unwrap();
            assert!(fast.max_abs_diff(&naive_product(&a, &b)) < 1e-14);
        }
    }

    #[test]
    fn sparse_skip_does_not_change_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::matrix(&mut rng, 6, 6);
        let mut b = random::matrix(&mut rng, 6, 6);
        for j in 0..6 {
            b[(2, j)] = ZERO;
            b[(4, j)] = ZERO;
        }
        assert!(matmul(&a, &b).unwrap().max_abs_diff(&naive_product(&a, &b)) < 1e-14);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = matmul(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { op: "matmul", .. }));
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)),
            ComplexMatrix::identity(6)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random::matrix(&mut rng, 2, 3);
        assert_eq!(kron(&a, &ComplexMatrix::identity(1)), a);
    }

    #[test]
    fn hadamard_kron_identity_on_basis_vector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        let op = kron(&h, &ComplexMatrix::identity(2));
        // |0> (x) |1> is flat index 1.
        let out = op.apply(&[ZERO, ONE, ZERO, ZERO]).unwrap();
        let expected = [ZERO, c(s, 0.0), ZERO, c(s, 0.0)];
        for (o, e) in out.iter().zip(&expected) {
            assert!((o - e).norm() < 1e-15);
        }
    }

    #[test]
    fn adjoint_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::matrix(&mut rng, 3, 5);
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint().shape(), (5, 3));
    }

    #[test]
    fn operator_norm_basic_cases() {
        assert!((operator_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 2)), 0.0);
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        assert!((operator_norm(&ComplexMatrix::outer(&v)) - 1.0).abs() < 1e-12);
        let d = ComplexMatrix::from_diagonal(&[0.5, -3.0, 2.0]);
        assert!((operator_norm(&d) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let a = random::matrix(&mut rng, 4, 4);
            let gram = naive_product(&a.adjoint(), &a);
            let mut v: Vec<Complex64> = random::unit_vector(&mut rng, 4);
            for _ in 0..10_000 {
                v = gram.apply(&v).unwrap();
                let n = vector_norm(&v);
                v.iter_mut().for_each(|z| *z /= n);
            }
            let gv = gram.apply(&v).unwrap();
            let rayleigh: f64 = v.iter().zip(&gv).map(|(x, y)| (x.conj() * y).re).sum();
            assert!((operator_norm(&a) - rayleigh.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn operator_norm_of_wide_and_tall_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random::matrix(&mut rng, 2, 5);
        assert!((operator_norm(&a) - operator_norm(&a.adjoint())).abs() < 1e-10);
    }
}
