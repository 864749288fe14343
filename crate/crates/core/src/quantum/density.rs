use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

const TRACE_TOL: f64 = 1e-12;
const NEG_EIG_TOL: f64 = 1e-12;

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        linalg::check_hermitian(&m)?;
        let m = linalg::hermitize(&m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        let w = linalg::eigvalsh(&m);
        if w[0] < -NEG_EIG_TOL {
            return Err(Error::NotPositiveDefinite {
                min_eig: w[0],
                max_eig: w[w.len() - 1],
            });
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix(linalg::identity(n).unscale(n as f64))
    }

    /// `v v†` for a unit vector `v`.
    pub fn pure(v: &CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(DensityMatrix(linalg::outer(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Number of eigenvalues above `floor · λ_max`.
    pub fn rank(&self, floor: f64) -> usize {
        let w = linalg::eigvalsh(&self.0);
        let max = w[w.len() - 1];
        w.iter().filter(|&&x| x > floor * max).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn validation() {
        assert!(DensityMatrix::new(linalg::diag_real(&[0.25, 0.75])).is_ok());
        assert!(matches!(
            DensityMatrix::new(linalg::diag_real(&[0.5, 0.75])),
            Err(Error::BadTrace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(linalg::diag_real(&[1.5, -0.5])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn pure_states_have_rank_one() {
        let v = CVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let rho = DensityMatrix::pure(&v).unwrap();
        assert_eq!(rho.rank(1e-12), 1);
        assert_eq!(DensityMatrix::maximally_mixed(3).rank(1e-12), 3);
        assert!(matches!(
            DensityMatrix::pure(&CVector::from_element(2, Complex64::new(1.0, 0.0))),
            Err(Error::NotUnitNorm(_))
        ));
    }
}
