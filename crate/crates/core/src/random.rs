//! Seeded random generators. Every random quantity in the crate flows from
//! an explicit `u64` seed through ChaCha8, so results are reproducible.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex number with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_complex(rng: &mut SeededRng) -> Complex<f64> {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut SeededRng, len: usize) -> Vec<Complex<f64>> {
    (0..len).map(|_| random_complex(rng)).collect()
}

/// Gaussian-integer vector with parts in `[-bound, bound]`.
pub fn random_gaussian_integers(rng: &mut SeededRng, len: usize, bound: i32) -> Vec<Complex<f64>> {
    (0..len)
        .map(|_| Complex::new(f64::from(rng.random_range(-bound..=bound)), f64::from(rng.random_range(-bound..=bound))))
        .collect()
}

pub fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix<f64> {
    let a = random_matrix(rng, n, n);
    a.add(&a.adjoint()).expect("square shapes agree")
}

/// Unitary matrix from the QR factorization of a random square matrix.
pub fn random_unitary(rng: &mut SeededRng, n: usize) -> ComplexMatrix<f64> {
    let a: DMatrix<Complex<f64>> = random_matrix(rng, n, n).into_inner();
    let q = a.qr().q();
    ComplexMatrix::new(q).expect("QR of finite data is finite")
}
