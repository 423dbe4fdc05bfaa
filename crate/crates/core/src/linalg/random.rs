//! Seeded random matrices for property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{hermitian_eig, vector_norm, ComplexMatrix};

/// Complex Gaussian scalar with independent standard-normal parts.
pub fn scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| scalar(rng))
}

/// `(A + A*) / 2` for a Gaussian `A`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = matrix(rng, n, n);
    a.checked_add(&a.adjoint())
        .expect("same shape")
        .scale(Complex64::new(0.5, 0.0))
}

/// Unitary taken from the eigenvectors of a random Hermitian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    hermitian_eig(&hermitian(rng, n))
        .expect("random Hermitian input")
        .eigenvectors
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| scalar(rng)).collect();
    let norm = vector_norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}
