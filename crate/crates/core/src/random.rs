//! Seeded random instances: states, unitaries, channels and kernels.
//!
//! Sampled checks (positivity improving, diameter estimates) draw from these so
//! that a fixed seed reproduces the same verdict.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classical::{ProbabilityVector, StochasticMatrix};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{DensityMatrix, KrausMap};

pub use rand_chacha::ChaCha8Rng as SeededRng;
pub use rand::SeedableRng;

pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unit vector in `C^n`.
pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v.unscale(norm);
        }
    }
}

/// Full-rank density matrix drawn from the Hilbert-Schmidt (Wishart) ensemble.
pub fn density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    loop {
        let g = gaussian_matrix(n, n, rng);
        let w = &g * g.adjoint();
        let t = w.trace().re;
        let rho = linalg::hermitize(&w.unscale(t));
        let eigs = linalg::eigvalsh(&rho);
        if eigs[0] > 1e-6 {
            return DensityMatrix::new(rho).expect("Wishart sample is a valid density");
        }
    }
}

/// Haar unitary from the QR decomposition of a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random trace-preserving Kraus map with `count` coefficients,
/// `E_i = G_i S^{-1/2}` with `S = Σ G_i† G_i`.
pub fn kraus_map<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> KrausMap {
    let gs: Vec<CMatrix> = (0..count).map(|_| gaussian_matrix(n, n, rng)).collect();
    let s = gs
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, g| acc + g.adjoint() * g);
    let s_inv_half = linalg::pd_inv_sqrt(&s).expect("Gaussian frame is full rank");
    KrausMap::new(gs.iter().map(|g| g * &s_inv_half).collect())
        .expect("normalized frame is trace preserving")
}

/// Row-stochastic matrix with entries bounded away from zero.
pub fn positive_stochastic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StochasticMatrix {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.05..1.0));
    StochasticMatrix::normalize_rows(m).expect("positive rows normalize")
}

/// Probability vector with entries bounded away from zero.
pub fn probability<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbabilityVector {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    ProbabilityVector::normalize(v).expect("positive weights normalize")
}
