//! Seeded random fixtures shared by the verification suites.
//!
//! All randomness flows through [`ChaCha8Rng`], which produces the same stream
//! on every platform for a given seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::quantum::WaveVector;
use crate::simplex::ProbabilityVector;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform (flat Dirichlet) sample from the simplex.
pub fn random_probability<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbabilityVector {
    loop {
        let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        if let Ok(p) = ProbabilityVector::from_weights(w) {
            return p;
        }
    }
}

/// Uniform simplex sample conditioned on every component being at least `floor`.
pub fn random_interior_probability<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> ProbabilityVector {
    loop {
        let p = random_probability(n, rng);
        if p.min_component() >= floor {
            return p;
        }
    }
}

pub fn random_phases<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

pub fn random_real_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    (&a + a.transpose()) * 0.5
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let a = random_complex(n, n, rng);
    (&a + a.adjoint()).map(|z| z * 0.5)
}

pub fn random_complex_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let a = random_complex(n, n, rng);
    (&a + a.transpose()).map(|z| z * 0.5)
}

/// Haar-distributed normalized state.
pub fn random_wave<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WaveVector {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    WaveVector::new(v.into_iter().map(|z| z / norm).collect())
}
