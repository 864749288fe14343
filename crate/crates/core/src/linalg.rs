//! Dense complex matrix helpers: Hermitian eigendecomposition and the matrix
//! functions (inverse, square roots) used by the quantum solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative eigenvalue floor below which matrix functions refuse to invert.
pub const MATFN_FLOOR: f64 = 1e-13;

/// Relative eigenvalue floor for accepting a matrix as an interior point of the cone.
pub const PD_FLOOR: f64 = 1e-12;

/// Absolute Hermitian tolerance (scaled by the largest entry when that exceeds 1).
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        d.len(),
        d.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// `(A + A†) / 2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest entry of `|A - A†|`.
pub fn asymmetry(a: &CMatrix) -> f64 {
    let d = a - a.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(a.nrows())
}

pub fn check_hermitian(a: &CMatrix) -> Result<()> {
    check_square(a)?;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { index: 0 });
    }
    let asym = asymmetry(a);
    if asym > HERMITIAN_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    eigh(a).0
}

/// `V diag(f(w)) V†` for a Hermitian `A = V diag(w) V†`.
pub fn hermitian_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &w) in values.iter().enumerate() {
        let fw = f(w);
        for i in 0..n {
            scaled[(i, j)] *= fw;
        }
    }
    hermitize(&(scaled * vectors.adjoint()))
}

/// Applies `f` to the spectrum of a positive definite matrix, rejecting
/// matrices whose smallest eigenvalue falls under the relative floor.
pub fn pd_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (values, vectors) = eigh(a);
    let min = values[0];
    let max = *values.last().unwrap();
    if !(max > 0.0) || min <= MATFN_FLOOR * max {
        return Err(Error::NotPositiveDefinite {
            min_eig: min,
            max_eig: max,
        });
    }
    Ok(hermitian_map(&values, &vectors, f))
}

pub fn pd_inverse(a: &CMatrix) -> Result<CMatrix> {
    pd_function(a, |w| 1.0 / w)
}

pub fn pd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    pd_function(a, f64::sqrt)
}

pub fn pd_inv_sqrt(a: &CMatrix) -> Result<CMatrix> {
    pd_function(a, |w| 1.0 / w.sqrt())
}

/// Square root of a positive semidefinite matrix; negative roundoff eigenvalues are clamped.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(a);
    hermitian_map(&values, &vectors, |w| w.max(0.0).sqrt())
}

/// Upper-triangular `R` with `R† R = A` (Cholesky).
pub fn upper_cholesky(a: &CMatrix) -> Result<CMatrix> {
    let chol = nalgebra::Cholesky::new(hermitize(a)).ok_or_else(|| {
        let w = eigvalsh(a);
        Error::NotPositiveDefinite {
            min_eig: w[0],
            max_eig: *w.last().unwrap(),
        }
    })?;
    Ok(chol.l().adjoint())
}

/// Inverse of a general square matrix.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone().try_inverse().ok_or(Error::NotPositiveDefinite {
        min_eig: 0.0,
        max_eig: 0.0,
    })
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.trace()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A - B‖_F / max(‖B‖_F, 1)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b)) / frobenius(b).max(1.0)
}

/// Outer product `v v†`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
