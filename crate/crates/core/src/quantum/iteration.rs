use crate::cone;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::report::SolveReport;

use super::{KrausMap, Normalization, QuantumOptions};

/// Contraction bound `tanh(Δ/4)` from sampled diameters of both `ℰ†` and `ℰ`.
/// `None` when the sampled images leave the cone.
pub(crate) fn estimated_rate(e: &KrausMap, opts: &QuantumOptions) -> Option<f64> {
    let mut rng = crate::random::seeded(opts.seed.wrapping_add(1));
    let forward = cone::psd_diameter_estimate(|x| e.apply_unchecked(x), e.dim(), opts.diameter_samples, &mut rng);
    let backward =
        cone::psd_diameter_estimate(|x| e.apply_adjoint_unchecked(x), e.dim(), opts.diameter_samples, &mut rng);
    match (forward, backward) {
        (Ok(a), Ok(b)) => cone::birkhoff_ratio(a.max(b)).ok(),
        _ => None,
    }
}

/// Iterates `x ← step(x)` from `opts.initial` (or `I`) until successive iterates
/// are within `opts.tol` in the Hilbert metric.
///
/// A step that fails on a matrix function, or an iterate that is no longer
/// positive definite, ends the run with [`Error::LeftCone`].
pub(crate) fn fixed_point<F>(
    dim: usize,
    step: F,
    opts: &QuantumOptions,
    rate: Option<f64>,
) -> Result<(CMatrix, SolveReport)>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let mut x = match &opts.initial {
        Some(m) => {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
            crate::cone::PositiveDefiniteMatrix::new(m.clone())?.into_inner()
        }
        None => linalg::identity(dim),
    };
    let mut report = SolveReport::new(rate);
    loop {
        let left_cone = |report: &SolveReport, iterate: &CMatrix| Error::LeftCone {
            iteration: report.iterations + 1,
            iterate: Box::new(iterate.clone()),
            report: Box::new(report.clone()),
        };
        let mut next = match step(&x) {
            Ok(m) => m,
            Err(Error::NotPositiveDefinite { .. }) => return Err(left_cone(&report, &x)),
            Err(e) => return Err(e),
        };
        if opts.normalization == Normalization::UnitTrace {
            let tr = next.trace().re;
            next.unscale_mut(tr);
        }
        let residual = match cone::psd_distance_raw(&next, &x) {
            Ok(d) if d.is_finite() => d,
            _ => return Err(left_cone(&report, &next)),
        };
        report.push(residual);
        log::trace!("quantum iteration {}: residual {:e}", report.iterations, residual);
        x = next;
        if residual < opts.tol {
            report.converged = true;
            return Ok((x, report));
        }
        if report.iterations >= opts.max_iter {
            return Err(Error::NotConverged {
                report: Box::new(report),
            });
        }
    }
}
