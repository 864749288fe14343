use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Tolerance on `‖Σ E_i† E_i − I‖` (largest entry) for trace preservation.
pub const TP_TOL: f64 = 1e-10;

/// Default cap on the number of coefficients produced by composing maps.
pub const DEFAULT_COMPOSITION_CAP: usize = 4096;

/// A completely positive trace-preserving map `ρ ↦ Σ E_i ρ E_i†` given by its
/// Kraus coefficients.
///
/// [`apply`](KrausMap::apply) evolves states (the Kraus map itself);
/// [`apply_adjoint`](KrausMap::apply_adjoint) evolves observables
/// `X ↦ Σ E_i† X E_i`, the unital dual in the trace pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausMap {
    coeffs: Vec<CMatrix>,
    dim: usize,
}

impl KrausMap {
    /// Validates shapes and trace preservation.
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let map = Self::from_coeffs_unchecked(coeffs)?;
        let dev = map.trace_preservation_error();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(map)
    }

    /// Checks shapes only. Used for transformed maps whose trace
    /// preservation is certified separately by a residual.
    pub fn from_coeffs_unchecked(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs.first().ok_or(Error::Empty)?;
        let dim = linalg::check_square(first)?;
        for c in &coeffs {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.nrows().max(c.ncols()),
                });
            }
        }
        Ok(KrausMap { coeffs, dim })
    }

    pub fn identity(n: usize) -> Self {
        KrausMap {
            coeffs: vec![linalg::identity(n)],
            dim: n,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coefficients `n_E`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    fn check_dim(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows().max(x.ncols()),
            });
        }
        Ok(())
    }

    /// `Σ E_i ρ E_i†`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.check_dim(rho)?;
        Ok(self.apply_unchecked(rho))
    }

    /// `Σ E_i† X E_i`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x)?;
        Ok(self.apply_adjoint_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix) -> CMatrix {
        let sum = self
            .coeffs
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e * rho * e.adjoint());
        linalg::hermitize(&sum)
    }

    pub(crate) fn apply_adjoint_unchecked(&self, x: &CMatrix) -> CMatrix {
        let sum = self
            .coeffs
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e.adjoint() * x * e);
        linalg::hermitize(&sum)
    }

    /// Largest entry of `|Σ E_i† E_i − I|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let s = self
            .coeffs
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e.adjoint() * e);
        linalg::max_abs(&(s - linalg::identity(self.dim)))
    }

    /// Largest entry of `|Σ E_i E_i† − I|`; zero for unital (doubly stochastic) maps.
    pub fn unitality_error(&self) -> f64 {
        let s = self
            .coeffs
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e * e.adjoint());
        linalg::max_abs(&(s - linalg::identity(self.dim)))
    }

    /// Coefficients `left · E_i · right`.
    pub fn conjugated(&self, left: &CMatrix, right: &CMatrix) -> KrausMap {
        KrausMap {
            coeffs: self.coeffs.iter().map(|e| left * e * right).collect(),
            dim: self.dim,
        }
    }

    /// The map `self` followed by `next`: coefficients `next_j · self_i`, with the
    /// later index varying slowest.
    pub fn then(&self, next: &KrausMap, cap: usize) -> Result<KrausMap> {
        if next.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: next.dim,
            });
        }
        let count = self.len().saturating_mul(next.len());
        if count > cap {
            return Err(Error::CompositionTooLarge { count, cap });
        }
        let mut coeffs = Vec::with_capacity(count);
        for later in &next.coeffs {
            for earlier in &self.coeffs {
                coeffs.push(later * earlier);
            }
        }
        Ok(KrausMap { coeffs, dim: self.dim })
    }

    /// `E_{T−1} ∘ ⋯ ∘ E_0`, coefficient index order `(i_{T−1}, …, i_0)` lexicographic.
    pub fn compose_sequence(maps: &[KrausMap], cap: usize) -> Result<KrausMap> {
        let first = maps.first().ok_or(Error::Empty)?;
        let count = maps
            .iter()
            .try_fold(1usize, |acc, m| acc.checked_mul(m.len()))
            .unwrap_or(usize::MAX);
        if count > cap {
            return Err(Error::CompositionTooLarge { count, cap });
        }
        maps[1..].iter().try_fold(first.clone(), |acc, m| acc.then(m, cap))
    }
}
