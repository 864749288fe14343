use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on `|Σ p − 1|` and on stochastic row sums.
pub const SUM_TOL: f64 = 1e-12;

/// A nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(DVector<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        check_nonnegative(&entries)?;
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(ProbabilityVector(DVector::from_vec(entries)))
    }

    /// Divides nonnegative weights by their total.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        check_nonnegative(&weights)?;
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::NotNormalized { sum });
        }
        Ok(ProbabilityVector(DVector::from_iterator(
            weights.len(),
            weights.into_iter().map(|w| w / sum),
        )))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(DVector::from_element(n, 1.0 / n as f64))
    }

    /// Wraps without validation, for re-checking stored results.
    pub fn from_vector_unchecked(v: DVector<f64>) -> Self {
        ProbabilityVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }
}

fn check_nonnegative(entries: &[f64]) -> Result<()> {
    for (index, &value) in entries.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

/// A square row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        check_nonnegative(m.as_slice())?;
        for (row, r) in m.row_iter().enumerate() {
            let sum = r.sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::NotStochastic { row, sum });
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Divides each row of a nonnegative matrix by its sum.
    pub fn normalize_rows(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        check_nonnegative(m.as_slice())?;
        for (row, mut r) in m.row_iter_mut().enumerate() {
            let sum = r.sum();
            if !(sum > 0.0) {
                return Err(Error::NotStochastic { row, sum });
            }
            r /= sum;
        }
        Ok(StochasticMatrix(m))
    }

    /// Wraps without validation, for re-checking stored results.
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        StochasticMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        StochasticMatrix(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// First zero entry in row-major order, if any.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.0[(i, j)] <= 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.first_zero().is_none()
    }

    /// `self · other`; the product of stochastic matrices is stochastic.
    pub fn then(&self, other: &StochasticMatrix) -> StochasticMatrix {
        StochasticMatrix(&self.0 * &other.0)
    }

    /// Row-normalized transpose: a kernel for the reversed time direction.
    /// Any row rescaling of the reversed kernel yields the same bridge.
    pub fn time_reversed(&self) -> Result<StochasticMatrix> {
        Self::normalize_rows(self.0.transpose())
    }

    /// Relabels states: `out[perm[i], perm[j]] = self[i, j]`.
    pub fn permuted(&self, perm: &[usize]) -> StochasticMatrix {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(perm[i], perm[j])] = self.0[(i, j)];
            }
        }
        StochasticMatrix(out)
    }

    /// Distribution after one step from `p`: `pᵀ Π`.
    pub fn push_forward(&self, p: &DVector<f64>) -> DVector<f64> {
        self.0.tr_mul(p)
    }
}

/// A window of a Markov chain: initial law and the kernels `Π(0) … Π(T−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPrior {
    initial: ProbabilityVector,
    kernels: Vec<StochasticMatrix>,
}

impl MarkovPrior {
    pub fn new(initial: ProbabilityVector, kernels: Vec<StochasticMatrix>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::Empty);
        }
        let n = initial.len();
        if let Some(k) = kernels.iter().find(|k| k.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.dim(),
            });
        }
        Ok(MarkovPrior { initial, kernels })
    }

    pub fn initial(&self) -> &ProbabilityVector {
        &self.initial
    }

    pub fn kernels(&self) -> &[StochasticMatrix] {
        &self.kernels
    }

    pub fn horizon(&self) -> usize {
        self.kernels.len()
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// `Π(t) Π(t+1) ⋯ Π(t+n−1)`.
    pub fn window_kernel(&self, t: usize, n: usize) -> StochasticMatrix {
        self.kernels[t..t + n]
            .iter()
            .fold(StochasticMatrix::identity(self.dim()), |acc, k| acc.then(k))
    }

    /// `Π(0) ⋯ Π(T−1)`.
    pub fn composed_kernel(&self) -> StochasticMatrix {
        self.window_kernel(0, self.horizon())
    }

    /// Marginals `p_t` of the prior chain for `t = 0 … T`.
    pub fn marginals(&self) -> Vec<ProbabilityVector> {
        let mut out = vec![self.initial.clone()];
        for k in &self.kernels {
            let next = k.push_forward(out.last().unwrap().as_vector());
            out.push(ProbabilityVector::from_vector_unchecked(next));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbabilityVector::new(vec![1.0, 0.0]).is_ok());
        assert!(matches!(
            ProbabilityVector::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            ProbabilityVector::new(vec![1.5, -0.5]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(ProbabilityVector::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn stochastic_validation() {
        assert!(StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).is_ok());
        assert!(matches!(
            StochasticMatrix::from_rows(&[vec![0.9, 0.2], vec![0.2, 0.8]]),
            Err(Error::NotStochastic { row: 0, .. })
        ));
        assert!(matches!(
            StochasticMatrix::from_rows(&[vec![1.0], vec![0.2, 0.8]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prior_marginals_and_window() {
        let k = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let prior = MarkovPrior::new(ProbabilityVector::uniform(2), vec![k.clone(), k.clone()]).unwrap();
        let m = prior.marginals();
        assert_eq!(m.len(), 3);
        assert!((m[1].as_slice()[0] - 0.55).abs() < 1e-15);
        let two = prior.composed_kernel();
        assert!((two.matrix() - k.matrix() * k.matrix()).norm() < 1e-15);
    }

    #[test]
    fn time_reversal_is_stochastic() {
        let k = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let r = k.time_reversed().unwrap();
        for row in r.matrix().row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-15);
        }
    }
}
