//! Sampled check of the positivity-improving property: every density matrix
//! must be mapped into the interior of the cone.
//!
//! Deciding the property exactly is NP-hard in general. The check proves
//! failure (with an explicit witness) but only ever reports success as
//! "passed on samples".

use rand::Rng;

use crate::linalg::{self, CMatrix, CVector};
use crate::random;

use super::KrausMap;

/// Minimum relative eigenvalue below which a sampled image counts as singular.
const SINGULAR_FLOOR: f64 = 1e-12;
/// Images this close to the boundary make the verdict inconclusive.
const MARGIN: f64 = 1e-9;

/// Vectors `v, w` with `w† E_i v ≈ 0` for every coefficient, so that the image of
/// `v v†` is annihilated by `w` and the map is not positivity improving.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub input: CVector,
    pub annihilator: CVector,
    /// `max_i |w† E_i v|`.
    pub overlap: f64,
    pub reason: WitnessReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessReason {
    /// `n_E ≤ n`: a pencil eigenvector makes the vectors `E_i v` span less than the space.
    TooFewCoefficients,
    /// A sampled rank-one input was mapped onto the boundary of the cone.
    SampledSingularImage,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositivityCheck {
    /// Every sampled rank-one input mapped strictly inside the cone.
    PassedOnSamples { trials: usize, min_relative_eigenvalue: f64 },
    Fail(Witness),
    /// Some sampled image came within `1e-9` (relative) of the boundary.
    Inconclusive { trials: usize, min_relative_eigenvalue: f64 },
}

impl PositivityCheck {
    pub fn is_fail(&self) -> bool {
        matches!(self, PositivityCheck::Fail(_))
    }

    pub fn describe(&self) -> String {
        match self {
            PositivityCheck::PassedOnSamples { trials, min_relative_eigenvalue } => format!(
                "passed on {trials} sampled rank-one inputs (smallest relative eigenvalue {min_relative_eigenvalue:e})"
            ),
            PositivityCheck::Fail(w) => match w.reason {
                WitnessReason::TooFewCoefficients => format!(
                    "necessary condition n_E > n fails; witness pair has overlap {:e}",
                    w.overlap
                ),
                WitnessReason::SampledSingularImage => format!(
                    "a sampled rank-one input maps to the cone boundary; witness overlap {:e}",
                    w.overlap
                ),
            },
            PositivityCheck::Inconclusive { trials, min_relative_eigenvalue } => format!(
                "inconclusive after {trials} samples (smallest relative eigenvalue {min_relative_eigenvalue:e})"
            ),
        }
    }
}

fn overlap(e: &KrausMap, v: &CVector, w: &CVector) -> f64 {
    e.coeffs()
        .iter()
        .map(|c| (w.adjoint() * c * v)[(0, 0)].norm())
        .fold(0.0, f64::max)
}

/// Right singular vector of the smallest singular value.
fn smallest_right_singular(m: &CMatrix) -> CVector {
    let (_, vectors) = linalg::eigh(&(m.adjoint() * m));
    vectors.column(0).into_owned()
}

/// Left vector orthogonal to every `E_i v`.
fn annihilator(e: &KrausMap, v: &CVector) -> CVector {
    let n = e.dim();
    let mut k = CMatrix::zeros(n, e.len());
    for (j, c) in e.coeffs().iter().enumerate() {
        k.set_column(j, &(c * v));
    }
    // Eigenvector of K K† for its smallest eigenvalue spans the left null space.
    let (_, vectors) = linalg::eigh(&(&k * k.adjoint()));
    vectors.column(0).into_owned()
}

/// Builds the witness of the `n_E ≤ n` necessary-condition failure.
fn pencil_witness(e: &KrausMap) -> Witness {
    let n = e.dim();
    let coeffs = e.coeffs();
    let v = if coeffs.len() == 1 {
        let mut v = CVector::zeros(n);
        v[0] = 1.0.into();
        v
    } else {
        let (e1, e2) = (&coeffs[0], &coeffs[1]);
        let (w2, _) = linalg::eigh(&(e2.adjoint() * e2));
        if w2[0] <= 1e-24 * w2[n - 1].max(1e-300) {
            // E₂ is singular: any kernel vector makes E₂v = 0.
            smallest_right_singular(e2)
        } else {
            // v with E₁v = λE₂v: an eigenvector of E₂⁻¹E₁, recovered as the null
            // vector of E₁ − λE₂ for each eigenvalue λ from the Schur form.
            let pencil = linalg::inverse(e2).map(|inv| inv * e1).unwrap_or_else(|_| e1.clone());
            let schur = pencil.clone().schur();
            let (_, t) = schur.unpack();
            (0..n)
                .map(|i| {
                    let lambda = t[(i, i)];
                    smallest_right_singular(&(e1 - e2 * lambda))
                })
                .min_by(|a, b| {
                    let wa = annihilator(e, a);
                    let wb = annihilator(e, b);
                    overlap(e, a, &wa).total_cmp(&overlap(e, b, &wb))
                })
                .expect("n >= 1")
        }
    };
    let w = annihilator(e, &v);
    Witness {
        overlap: overlap(e, &v, &w),
        input: v,
        annihilator: w,
        reason: WitnessReason::TooFewCoefficients,
    }
}

/// Sampled positivity-improving check.
///
/// Fails immediately with a pencil witness when `n_E ≤ n`. Otherwise samples
/// `trials` random rank-one inputs `v v†` and inspects the smallest eigenvalue
/// of `Σ E_i v v† E_i†`.
pub fn check_positivity_improving<R: Rng + ?Sized>(
    e: &KrausMap,
    trials: usize,
    rng: &mut R,
) -> PositivityCheck {
    let n = e.dim();
    if e.len() <= n {
        return PositivityCheck::Fail(pencil_witness(e));
    }
    let trials = trials.max(1);
    let mut min_rel = f64::INFINITY;
    for _ in 0..trials {
        let v = random::unit_vector(n, rng);
        let image = e.apply_unchecked(&linalg::outer(&v));
        let (values, vectors) = linalg::eigh(&image);
        let rel = values[0] / values[n - 1];
        if rel <= SINGULAR_FLOOR {
            let w = vectors.column(0).into_owned();
            return PositivityCheck::Fail(Witness {
                overlap: overlap(e, &v, &w),
                input: v,
                annihilator: w,
                reason: WitnessReason::SampledSingularImage,
            });
        }
        min_rel = min_rel.min(rel);
    }
    if min_rel < MARGIN {
        PositivityCheck::Inconclusive {
            trials,
            min_relative_eigenvalue: min_rel,
        }
    } else {
        PositivityCheck::PassedOnSamples {
            trials,
            min_relative_eigenvalue: min_rel,
        }
    }
}
