use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::types::{ProbabilityVector, StochasticMatrix};

const MASS_TOL: f64 = 1e-10;

/// Relative entropy `D(Q‖P) = Σ Q log(Q/P)` between two joint laws, with
/// `0·log 0 = 0`. Returns `+∞` when `Q` charges a cell that `P` does not.
pub fn relative_entropy(q: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<f64> {
    if q.shape() != p.shape() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    for m in [q, p] {
        if let Some((index, &value)) = m.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeEntry { index, value });
        }
        let sum = m.sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { sum });
        }
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p.iter()) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += qi * (qi / pi).ln();
    }
    // Roundoff can push an exact zero slightly negative.
    Ok(total.max(0.0))
}

/// Prior joint law of the endpoints, `p0(i) · Π(i, j)`.
pub fn prior_joint(p0: &ProbabilityVector, pi: &StochasticMatrix) -> Result<DMatrix<f64>> {
    let n = pi.dim();
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p0.len(),
        });
    }
    let p = p0.as_slice();
    Ok(DMatrix::from_fn(n, n, |i, j| p[i] * pi.matrix()[(i, j)]))
}
