//! Hilbert projective metric on the positive orthant and on the cone of
//! positive definite Hermitian matrices, with the Birkhoff contraction ratio.
//!
//! Distances are between rays: `d(λx, μy) = d(x, y)` for all `λ, μ > 0`.
//! Points on the boundary of a cone are at infinite distance from the
//! interior, which is represented by `f64::INFINITY` and never by a large float.

use rand::Rng;

use crate::classical::StochasticMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random;

/// A vector in the open positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveEntry { index, value });
            }
        }
        Ok(PositiveVector(entries))
    }

    pub fn ones(n: usize) -> Self {
        PositiveVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A Hermitian matrix in the interior of the positive semidefinite cone.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveDefiniteMatrix(CMatrix);

impl PositiveDefiniteMatrix {
    /// Rejects non-Hermitian input and matrices whose smallest eigenvalue is
    /// below `1e-12` times the largest (boundary points).
    pub fn new(m: CMatrix) -> Result<Self> {
        linalg::check_hermitian(&m)?;
        let m = linalg::hermitize(&m);
        let w = linalg::eigvalsh(&m);
        let (min, max) = (w[0], w[w.len() - 1]);
        if !(max > 0.0) || min <= linalg::PD_FLOOR * max {
            return Err(Error::NotPositiveDefinite {
                min_eig: min,
                max_eig: max,
            });
        }
        Ok(PositiveDefiniteMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        PositiveDefiniteMatrix(linalg::identity(n))
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
}

/// Hilbert projective distance; `+∞` between the interior and the boundary.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HilbertDistance(f64);

impl HilbertDistance {
    pub const INFINITE: HilbertDistance = HilbertDistance(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

/// `log(max_i(x_i/y_i) / min_i(x_i/y_i))`.
pub fn hilbert_distance_vec(x: &PositiveVector, y: &PositiveVector) -> Result<HilbertDistance> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(HilbertDistance(ratio_spread(x.as_slice(), y.as_slice())))
}

/// Distance between nonnegative vectors restricted to their common support.
///
/// Returns `+∞` if the supports differ or the common support is empty. Used
/// by the classical iteration, where zero marginal entries pin the matching
/// potential entries to zero for every iterate.
pub fn hilbert_distance_on_support(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (&a, &b) in x.iter().zip(y) {
        match (a > 0.0, b > 0.0) {
            (true, true) => {
                let r = a / b;
                max = max.max(r);
                min = min.min(r);
            }
            (false, false) => {}
            _ => return f64::INFINITY,
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (max / min).ln().max(0.0)
}

fn ratio_spread(x: &[f64], y: &[f64]) -> f64 {
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for (&a, &b) in x.iter().zip(y) {
        let r = a / b;
        max = max.max(r);
        min = min.min(r);
    }
    (max / min).ln().max(0.0)
}

/// `log(λ_max / λ_min)` of `Y^{-1/2} X Y^{-1/2}`.
pub fn hilbert_distance_psd(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<HilbertDistance> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    psd_distance_raw(x.matrix(), y.matrix()).map(HilbertDistance)
}

/// Distance between Hermitian matrices assumed (not checked) to be positive definite.
pub(crate) fn psd_distance_raw(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    let y_inv_half = linalg::pd_inv_sqrt(y)?;
    let z = &y_inv_half * x * &y_inv_half;
    let w = linalg::eigvalsh(&z);
    let (min, max) = (w[0], w[w.len() - 1]);
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((max / min).ln().max(0.0))
}

/// Projective diameter of a strictly positive kernel:
/// `max log(P_ij P_kl / (P_il P_kj))` over all index quadruples.
///
/// A zero entry makes the diameter infinite, reported as
/// [`Error::ZeroKernelEntry`].
pub fn projective_diameter_stochastic(p: &StochasticMatrix) -> Result<f64> {
    let m = p.matrix();
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] <= 0.0 {
                return Err(Error::ZeroKernelEntry { row: i, col: j });
            }
        }
    }
    let logs = m.map(f64::ln);
    // For fixed rows (i, k) the quadruple splits into two independent maxima over columns.
    let mut best = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            let mut a = f64::NEG_INFINITY;
            let mut b = f64::NEG_INFINITY;
            for j in 0..n {
                let d = logs[(i, j)] - logs[(k, j)];
                a = a.max(d);
                b = b.max(-d);
            }
            best = best.max(a + b);
        }
    }
    Ok(best)
}

/// Birkhoff contraction ratio `tanh(Δ/4)`; 1 for an infinite diameter.
pub fn birkhoff_ratio(diameter: f64) -> Result<f64> {
    if diameter.is_nan() || diameter < 0.0 {
        return Err(Error::NegativeDiameter(diameter));
    }
    if diameter.is_infinite() {
        return Ok(1.0);
    }
    Ok((diameter / 4.0).tanh())
}

/// Relative weight of the identity mixed into sampled rank-one inputs.
const RANK_ONE_PERTURBATION: f64 = 1e-9;

/// Sampled estimate of the projective diameter of a linear map on the PD cone:
/// `2 · max d_H(map(X), map(I/n))` over sampled density matrices `X`.
///
/// Samples are the basis projectors and random rank-one projectors (each
/// nudged into the interior by a `1e-9` admixture of `I/n`) alternated with
/// random full-rank densities. The result is an estimate, not a bound: the
/// supremum over all densities may be larger.
pub fn psd_diameter_estimate<F, R>(
    channel_apply: F,
    dim: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64>
where
    F: Fn(&CMatrix) -> CMatrix,
    R: Rng + ?Sized,
{
    if dim == 0 {
        return Err(Error::Empty);
    }
    let uniform = linalg::identity(dim).unscale(dim as f64);
    let reference = channel_apply(&uniform);
    let reference = PositiveDefiniteMatrix::new(linalg::hermitize(&reference)).map_err(|_| {
        Error::NotPositivityImproving("image of the maximally mixed state is singular".into())
    })?;
    let mut best = 0.0_f64;
    for s in 0..samples.max(1) {
        let x = if s < dim {
            let mut e = linalg::CVector::zeros(dim);
            e[s] = 1.0.into();
            perturbed_projector(&e, &uniform)
        } else if s % 2 == 0 {
            perturbed_projector(&random::unit_vector(dim, rng), &uniform)
        } else {
            random::density_matrix(dim, rng).into_inner()
        };
        let image = linalg::hermitize(&channel_apply(&x));
        let image = PositiveDefiniteMatrix::new(image).map_err(|e| {
            Error::NotPositivityImproving(format!("sampled image left the cone: {e}"))
        })?;
        let d = hilbert_distance_psd(&image, &reference)?.value();
        best = best.max(d);
    }
    Ok(2.0 * best)
}

fn perturbed_projector(v: &linalg::CVector, uniform: &CMatrix) -> CMatrix {
    linalg::outer(v).scale(1.0 - RANK_ONE_PERTURBATION) + uniform.scale(RANK_ONE_PERTURBATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::StochasticMatrix;
    use nalgebra::DMatrix;

    fn pv(v: &[f64]) -> PositiveVector {
        PositiveVector::new(v.to_vec()).unwrap()
    }

    fn pd(d: &[f64]) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::new(linalg::diag_real(d)).unwrap()
    }

    #[test]
    fn vector_distance_examples() {
        let d = |x: &[f64], y: &[f64]| hilbert_distance_vec(&pv(x), &pv(y)).unwrap().value();
        assert_eq!(d(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert_eq!(d(&[2.0, 2.0], &[1.0, 1.0]), 0.0);
        assert!((d(&[1.0, 2.0], &[2.0, 1.0]) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn vector_distance_errors() {
        assert!(matches!(
            hilbert_distance_vec(&pv(&[1.0]), &pv(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            PositiveVector::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveEntry { index: 1, .. })
        ));
    }

    #[test]
    fn support_distance() {
        assert_eq!(hilbert_distance_on_support(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]), 0.0);
        assert!(hilbert_distance_on_support(&[0.0, 1.0], &[1.0, 1.0]).is_infinite());
    }

    #[test]
    fn psd_distance_examples() {
        let d = |x: &[f64], y: &[f64]| hilbert_distance_psd(&pd(x), &pd(y)).unwrap().value();
        assert_eq!(d(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert!(d(&[2.0, 2.0], &[1.0, 1.0]).abs() < 1e-15);
        assert!((d(&[4.0, 1.0], &[1.0, 1.0]) - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn psd_rejects_boundary_and_non_hermitian() {
        assert!(PositiveDefiniteMatrix::new(linalg::diag_real(&[1.0, 1e-13])).is_err());
        let mut m = linalg::identity(2);
        m[(0, 1)] = 0.1.into();
        assert!(matches!(PositiveDefiniteMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn diameter_examples() {
        let p = |rows: &[f64]| {
            let n = (rows.len() as f64).sqrt() as usize;
            StochasticMatrix::new(DMatrix::from_row_slice(n, n, rows)).unwrap()
        };
        assert_eq!(projective_diameter_stochastic(&p(&[0.5, 0.5, 0.5, 0.5])).unwrap(), 0.0);
        let d = projective_diameter_stochastic(&p(&[0.9, 0.1, 0.1, 0.9])).unwrap();
        assert!((d - 81f64.ln()).abs() < 1e-12);
        let third = 1.0 / 3.0;
        assert!(projective_diameter_stochastic(&p(&[third; 9])).unwrap().abs() < 1e-15);
        assert!(matches!(
            projective_diameter_stochastic(&p(&[1.0, 0.0, 0.5, 0.5])),
            Err(Error::ZeroKernelEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn diameter_matches_quadruple_enumeration() {
        let mut rng = random::seeded(5);
        for n in 2..6 {
            let p = random::positive_stochastic(n, &mut rng);
            let m = p.matrix();
            let mut brute = 0.0_f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            brute = brute.max((m[(i, j)] * m[(k, l)] / (m[(i, l)] * m[(k, j)])).ln());
                        }
                    }
                }
            }
            let fast = projective_diameter_stochastic(&p).unwrap();
            assert!((fast - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn birkhoff_ratio_examples() {
        assert_eq!(birkhoff_ratio(0.0).unwrap(), 0.0);
        assert_eq!(birkhoff_ratio(f64::INFINITY).unwrap(), 1.0);
        assert!((birkhoff_ratio(81f64.ln()).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(birkhoff_ratio(-1.0), Err(Error::NegativeDiameter(_))));
    }

    #[test]
    fn diameter_estimate_of_depolarizing_is_zero() {
        let mut rng = random::seeded(1);
        let n = 3;
        let est = psd_diameter_estimate(
            |x: &CMatrix| linalg::identity(n).scale(x.trace().re / n as f64),
            n,
            20,
            &mut rng,
        )
        .unwrap();
        assert!(est.abs() < 1e-12);
    }

    #[test]
    fn diameter_estimate_of_identity_is_reported_as_is() {
        let mut rng = random::seeded(1);
        let est = psd_diameter_estimate(|x: &CMatrix| x.clone(), 2, 10, &mut rng).unwrap();
        // A perturbed basis projector sits at log((1 - ε + ε/2) / (ε/2)) from I/2.
        let eps = RANK_ONE_PERTURBATION;
        let expected = 2.0 * ((1.0 - eps + eps / 2.0) / (eps / 2.0)).ln();
        assert!((est - expected).abs() < 1e-6);
    }

    #[test]
    fn diameter_estimate_rejects_singular_images() {
        let mut rng = random::seeded(1);
        let project = |x: &CMatrix| {
            let mut y = CMatrix::zeros(2, 2);
            y[(0, 0)] = x.trace();
            y
        };
        assert!(matches!(
            psd_diameter_estimate(project, 2, 4, &mut rng),
            Err(Error::NotPositivityImproving(_))
        ));
    }
}
