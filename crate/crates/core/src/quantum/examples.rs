//! Small qubit channels with known bridge solutions, used in tests, the
//! acceptance suite and the benches.

use num_complex::Complex64;

use crate::linalg::{self, CMatrix};

use super::KrausMap;

fn real(rows: [[f64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Self-adjoint, positivity improving, doubly stochastic qubit channel with coefficients
/// `diag(√½, 0)`, `diag(0, √½)` and `√½ σ_x`.
pub fn symmetric_three_coefficient_map() -> KrausMap {
    let s = 0.5_f64.sqrt();
    KrausMap::new(vec![
        real([[s, 0.0], [0.0, 0.0]]),
        real([[0.0, 0.0], [0.0, s]]),
        real([[0.0, s], [s, 0.0]]),
    ])
    .expect("trace preserving")
}

/// Doubly stochastic qubit channel whose three symmetric coefficients all have rank one.
pub fn rank_one_three_coefficient_map() -> KrausMap {
    let a = (2.0_f64 / 3.0).sqrt();
    let b = (1.0_f64 / 24.0).sqrt();
    let c = (1.0_f64 / 8.0).sqrt();
    let d = (3.0_f64 / 8.0).sqrt();
    KrausMap::new(vec![
        real([[a, 0.0], [0.0, 0.0]]),
        real([[b, -c], [-c, d]]),
        real([[b, c], [c, d]]),
    ])
    .expect("trace preserving")
}

/// Non-unital qubit channel `E_i = A_i M^{-1/2}` with `M = [[2, 1], [1, 4]]` and
/// `A = [[1, 1], [0, 0]]`, `[[0, 1], [0, 1]]`, `[[0, 1], [1, 0]]`, so that
/// `Σ A_i† A_i = M`.
pub fn skewed_three_coefficient_map() -> KrausMap {
    let m = real([[2.0, 1.0], [1.0, 4.0]]);
    let m_inv_half = linalg::pd_inv_sqrt(&m).expect("M is positive definite");
    KrausMap::new(vec![
        real([[1.0, 1.0], [0.0, 0.0]]) * &m_inv_half,
        real([[0.0, 1.0], [0.0, 1.0]]) * &m_inv_half,
        real([[0.0, 1.0], [1.0, 0.0]]) * &m_inv_half,
    ])
    .expect("trace preserving")
}

/// Completely depolarizing channel `ρ ↦ tr(ρ) I/n` with the `n²` coefficients
/// `e_i e_j† / √n`.
pub fn completely_depolarizing(n: usize) -> KrausMap {
    let scale = 1.0 / (n as f64).sqrt();
    let mut coeffs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = Complex64::new(scale, 0.0);
            coeffs.push(e);
        }
    }
    KrausMap::new(coeffs).expect("trace preserving")
}
