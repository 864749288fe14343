//! One-step Schrödinger system for a stochastic kernel and two marginals.
//!
//! The solver iterates the map
//!
//! ```text
//! φ̂₀ ──Πᵀ──▶ φ̂_T ──p_T ⊘ ·──▶ φ_T ──Π──▶ φ₀ ──p₀ ⊘ ·──▶ φ̂₀'
//! ```
//!
//! which is a strict contraction in the Hilbert metric when `Π` has strictly
//! positive entries: the two kernel applications contract by at most
//! `tanh(Δ(Π)/4)` each and the componentwise divisions are isometries (or
//! contractions, when a marginal has zeros).

use nalgebra::{DMatrix, DVector};

use crate::cone;
use crate::error::{Error, Result};
use crate::report::SolveReport;

use super::types::{ProbabilityVector, StochasticMatrix};
use super::ClassicalOptions;

/// The four vectors `φ(0,·), φ(T,·), φ̂(0,·), φ̂(T,·)` solving
///
/// ```text
/// φ₀ = Π φ_T,   φ̂_T = Πᵀ φ̂₀,   φ₀ ⊙ φ̂₀ = p₀,   φ_T ⊙ φ̂_T = p_T.
/// ```
///
/// `φ̂₀` and `φ_T` vanish exactly where `p₀` and `p_T` do.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerPotentials {
    pub phi0: DVector<f64>,
    pub phi_t: DVector<f64>,
    pub phihat0: DVector<f64>,
    pub phihat_t: DVector<f64>,
}

impl SchrodingerPotentials {
    /// The equivalent solution `(aφ, φ̂/a)`.
    pub fn rescaled(&self, a: f64) -> Self {
        SchrodingerPotentials {
            phi0: &self.phi0 * a,
            phi_t: &self.phi_t * a,
            phihat0: &self.phihat0 / a,
            phihat_t: &self.phihat_t / a,
        }
    }

    pub fn dim(&self) -> usize {
        self.phi0.len()
    }
}

fn check_dims(pi: &StochasticMatrix, p0: &ProbabilityVector, pt: &ProbabilityVector) -> Result<()> {
    let n = pi.dim();
    for p in [p0, pt] {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
    }
    Ok(())
}

/// `10 · ⌈log(tol) / log(rate)⌉`, capped at `10⁵`.
pub(crate) fn default_max_iter(tol: f64, rate: Option<f64>) -> usize {
    const CAP: usize = 100_000;
    const FLOOR: usize = 100;
    match rate {
        Some(r) if r > 0.0 && r < 1.0 => {
            let steps = (tol.ln() / r.ln()).ceil();
            if !steps.is_finite() || steps * 10.0 >= CAP as f64 {
                CAP
            } else {
                ((steps as usize) * 10).max(FLOOR)
            }
        }
        Some(0.0) => FLOOR,
        _ => CAP,
    }
}

/// Contraction bound `tanh(Δ/4)` of a kernel, or the zero-entry error.
pub(crate) fn kernel_rate(pi: &StochasticMatrix) -> Result<f64> {
    let delta = cone::projective_diameter_stochastic(pi)?;
    cone::birkhoff_ratio(delta)
}

fn divide_on_support(num: &[f64], den: &DVector<f64>) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(num.len());
    for (i, (&a, &b)) in num.iter().zip(den.iter()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if !(b > 0.0) {
            return Err(Error::Infeasible(format!(
                "potential vanishes at state {i} where the marginal is positive"
            )));
        }
        out[i] = a / b;
    }
    Ok(out)
}

/// Solves the one-step Schrödinger system by contractive fixed-point iteration.
///
/// Stops when the Hilbert distance between successive `φ̂₀` iterates drops
/// below `opts.tol`. On exit the potentials are scaled so that
/// `⟨φ̂₀, φ₀⟩ = 1`, making the bridge joint a probability law.
///
/// Zero entries in the marginals are accepted. Zero entries in `pi` are
/// rejected unless `opts.allow_zero_kernel` is set, in which case the
/// iteration runs without a rate guarantee.
pub fn solve_one_step(
    pi: &StochasticMatrix,
    p0: &ProbabilityVector,
    pt: &ProbabilityVector,
    opts: &ClassicalOptions,
) -> Result<(SchrodingerPotentials, SolveReport)> {
    check_dims(pi, p0, pt)?;
    let rate = match kernel_rate(pi) {
        Ok(r) => Some(r),
        Err(e @ Error::ZeroKernelEntry { .. }) => {
            if opts.allow_zero_kernel {
                log::warn!("kernel has zero entries; iterating without a contraction guarantee");
                None
            } else {
                return Err(e);
            }
        }
        Err(e) => return Err(e),
    };
    let max_iter = opts.max_iter.unwrap_or_else(|| default_max_iter(opts.tol, rate));
    let mut report = SolveReport::new(rate);

    let m = pi.matrix();
    let p0s = p0.as_slice();
    let pts = pt.as_slice();
    // All-ones start, restricted to the support of p₀ so that every iterate shares it.
    let mut x = DVector::from_iterator(p0.len(), p0s.iter().map(|&p| if p > 0.0 { 1.0 } else { 0.0 }));

    let step = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let phihat_t = m.tr_mul(x);
        let phi_t = divide_on_support(pts, &phihat_t)?;
        let phi0 = m * &phi_t;
        let mut next = divide_on_support(p0s, &phi0)?;
        let top = next.max();
        next /= top;
        Ok(next)
    };

    loop {
        let next = step(&x)?;
        let residual = cone::hilbert_distance_on_support(next.as_slice(), x.as_slice());
        report.push(residual);
        log::trace!("classical iteration {}: residual {:e}", report.iterations, residual);
        x = next;
        if residual < opts.tol {
            report.converged = true;
            break;
        }
        if report.iterations >= max_iter {
            return Err(Error::NotConverged {
                report: Box::new(report),
            });
        }
    }

    let phihat_t = m.tr_mul(&x);
    let phi_t = divide_on_support(pts, &phihat_t)?;
    let phi0 = m * &phi_t;
    let pairing = x.dot(&phi0);
    let potentials = SchrodingerPotentials {
        phi0,
        phi_t,
        phihat0: &x / pairing,
        phihat_t: phihat_t / pairing,
    };
    log::info!(
        "classical one-step solve converged in {} iterations (residual {:e})",
        report.iterations,
        report.final_residual
    );
    Ok((potentials, report))
}

/// Bridge joint law `q(i, j) = φ̂₀(i) Π(i, j) φ_T(j)`.
pub fn one_step_joint(potentials: &SchrodingerPotentials, pi: &StochasticMatrix) -> DMatrix<f64> {
    let n = pi.dim();
    DMatrix::from_fn(n, n, |i, j| {
        potentials.phihat0[i] * pi.matrix()[(i, j)] * potentials.phi_t[j]
    })
}

/// Bridge transition kernel `diag(φ₀)⁻¹ Π diag(φ_T)`.
pub fn one_step_transition(
    pi: &StochasticMatrix,
    potentials: &SchrodingerPotentials,
) -> Result<StochasticMatrix> {
    scaled_kernel(pi.matrix(), &potentials.phi0, &potentials.phi_t).map(StochasticMatrix::from_matrix_unchecked)
}

/// `diag(left)⁻¹ K diag(right)`; `left` must be strictly positive.
pub(crate) fn scaled_kernel(
    k: &DMatrix<f64>,
    left: &DVector<f64>,
    right: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if let Some((index, &value)) = left.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveEntry { index, value });
    }
    let n = k.nrows();
    Ok(DMatrix::from_fn(n, n, |i, j| k[(i, j)] * right[j] / left[i]))
}

/// Sinkhorn scaling: the multiplicative transformation of `pi` that is
/// doubly stochastic, obtained as the bridge between uniform marginals.
pub fn sinkhorn_doubly_stochastic(
    pi: &StochasticMatrix,
    opts: &ClassicalOptions,
) -> Result<(StochasticMatrix, SchrodingerPotentials, SolveReport)> {
    let uniform = ProbabilityVector::uniform(pi.dim());
    let (potentials, report) = solve_one_step(pi, &uniform, &uniform, opts)?;
    let transition = one_step_transition(pi, &potentials)?;
    Ok((transition, potentials, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::entropy::{prior_joint, relative_entropy};
    use crate::random;

    fn kernel(rows: &[&[f64]]) -> StochasticMatrix {
        StochasticMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn prob(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn opts() -> ClassicalOptions {
        ClassicalOptions::default()
    }

    fn assert_ray(v: &DVector<f64>, w: &[f64], tol: f64) {
        let d = cone::hilbert_distance_on_support(v.as_slice(), w);
        assert!(d < tol, "distance {d} between {v:?} and {w:?}");
    }

    #[test]
    fn uniform_everything_gives_constant_potentials() {
        let pi = kernel(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let u = prob(&[0.5, 0.5]);
        let (pot, report) = solve_one_step(&pi, &u, &u, &opts()).unwrap();
        for v in [&pot.phi0, &pot.phi_t, &pot.phihat0, &pot.phihat_t] {
            assert_ray(v, &[1.0, 1.0], 1e-14);
        }
        assert!(report.converged);
        assert!(report.iterations <= 2);
    }

    #[test]
    fn bridge_equals_prior_for_prior_marginals() {
        let pi = kernel(&[&[0.7, 0.2, 0.1], &[0.3, 0.3, 0.4], &[0.25, 0.25, 0.5]]);
        let p0 = prob(&[0.2, 0.5, 0.3]);
        let pt = ProbabilityVector::new(pi.push_forward(p0.as_vector()).iter().copied().collect()).unwrap();
        let (pot, _) = solve_one_step(&pi, &p0, &pt, &opts()).unwrap();
        let q = one_step_joint(&pot, &pi);
        let prior = prior_joint(&p0, &pi).unwrap();
        assert!((&q - &prior).amax() < 1e-12);
        assert!(relative_entropy(&q, &prior).unwrap() < 1e-12);
        let t = one_step_transition(&pi, &pot).unwrap();
        assert!((t.matrix() - pi.matrix()).amax() < 1e-11);
    }

    #[test]
    fn symmetric_kernel_with_uniform_marginals_is_its_own_sinkhorn() {
        let pi = kernel(&[&[0.9, 0.1], &[0.1, 0.9]]);
        let (t, pot, _) = sinkhorn_doubly_stochastic(&pi, &opts()).unwrap();
        assert!((t.matrix() - pi.matrix()).amax() < 1e-13);
        assert_ray(&pot.phi0, &[1.0, 1.0], 1e-13);
    }

    #[test]
    fn two_by_two_sinkhorn_matches_closed_form() {
        // Oracle: a doubly stochastic diag(u) Π diag(v) of a 2x2 kernel has the form
        // [[a, 1-a], [1-a, a]]; the cross ratio is invariant under diagonal scaling,
        // so a²/(1-a)² = (π₀₀ π₁₁)/(π₀₁ π₁₀), i.e. a = √c / (1 + √c).
        let pi = kernel(&[&[0.8, 0.2], &[0.4, 0.6]]);
        let c: f64 = (0.8 * 0.6) / (0.2 * 0.4);
        let a = c.sqrt() / (1.0 + c.sqrt());
        let (t, _, _) = sinkhorn_doubly_stochastic(&pi, &opts()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[a, 1.0 - a, 1.0 - a, a]);
        assert!((t.matrix() - expected).amax() < 1e-12);
    }

    #[test]
    fn sinkhorn_of_doubly_stochastic_is_identity_transformation() {
        let pi = kernel(&[&[0.6, 0.3, 0.1], &[0.1, 0.6, 0.3], &[0.3, 0.1, 0.6]]);
        let (t, pot, _) = sinkhorn_doubly_stochastic(&pi, &opts()).unwrap();
        assert!((t.matrix() - pi.matrix()).amax() < 1e-13);
        assert_ray(&pot.phi_t, &[1.0, 1.0, 1.0], 1e-13);
    }

    #[test]
    fn sinkhorn_is_equivariant_under_relabeling() {
        let mut rng = random::seeded(9);
        let pi = random::positive_stochastic(4, &mut rng);
        let perm = [2, 0, 3, 1];
        let (t, _, _) = sinkhorn_doubly_stochastic(&pi, &opts()).unwrap();
        let (tp, _, _) = sinkhorn_doubly_stochastic(&pi.permuted(&perm), &opts()).unwrap();
        assert!((tp.matrix() - t.permuted(&perm).matrix()).amax() < 1e-11);
    }

    #[test]
    fn rescaled_potentials_give_identical_transition() {
        let mut rng = random::seeded(2);
        let pi = random::positive_stochastic(3, &mut rng);
        let (pot, _) = solve_one_step(&pi, &random::probability(3, &mut rng), &random::probability(3, &mut rng), &opts()).unwrap();
        let a = one_step_transition(&pi, &pot).unwrap();
        for s in [1e-3, 0.5, 7.0, 1e4] {
            let b = one_step_transition(&pi, &pot.rescaled(s)).unwrap();
            assert!((a.matrix() - b.matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn identity_transformation_for_unit_potentials() {
        let pi = kernel(&[&[0.7, 0.3], &[0.4, 0.6]]);
        let pot = SchrodingerPotentials {
            phi0: DVector::from_element(2, 1.0),
            phi_t: DVector::from_element(2, 1.0),
            phihat0: DVector::from_element(2, 0.5),
            phihat_t: DVector::from_element(2, 0.5),
        };
        assert_eq!(one_step_transition(&pi, &pot).unwrap().matrix(), pi.matrix());
    }

    #[test]
    fn zero_marginal_entries_are_accepted() {
        let pi = kernel(&[&[0.5, 0.3, 0.2], &[0.2, 0.5, 0.3], &[0.3, 0.2, 0.5]]);
        let p0 = prob(&[0.0, 0.4, 0.6]);
        let pt = prob(&[0.5, 0.5, 0.0]);
        let (pot, _) = solve_one_step(&pi, &p0, &pt, &opts()).unwrap();
        let q = one_step_joint(&pot, &pi);
        assert_eq!(q.row(0).sum(), 0.0);
        assert_eq!(q.column(2).sum(), 0.0);
        for i in 0..3 {
            assert!((q.row(i).sum() - p0.as_slice()[i]).abs() < 1e-11);
            assert!((q.column(i).sum() - pt.as_slice()[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_kernel_entries_are_rejected_without_override() {
        let pi = kernel(&[&[1.0, 0.0], &[0.5, 0.5]]);
        let u = prob(&[0.5, 0.5]);
        assert!(matches!(
            solve_one_step(&pi, &u, &u, &opts()),
            Err(Error::ZeroKernelEntry { row: 0, col: 1 })
        ));
        let cyclic = kernel(&[&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5], &[0.5, 0.0, 0.5]]);
        let o = ClassicalOptions {
            allow_zero_kernel: true,
            ..opts()
        };
        let p0 = prob(&[0.2, 0.3, 0.5]);
        let pt = prob(&[0.4, 0.4, 0.2]);
        let (pot, report) = solve_one_step(&cyclic, &p0, &pt, &o).unwrap();
        assert!(report.contraction_bound.is_none());
        let q = one_step_joint(&pot, &cyclic);
        for i in 0..3 {
            assert!((q.row(i).sum() - p0.as_slice()[i]).abs() < 1e-10);
            assert!((q.column(i).sum() - pt.as_slice()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn max_iter_exhaustion_reports_trace() {
        let mut rng = random::seeded(4);
        let pi = random::positive_stochastic(5, &mut rng);
        let o = ClassicalOptions {
            max_iter: Some(2),
            ..opts()
        };
        match solve_one_step(&pi, &random::probability(5, &mut rng), &random::probability(5, &mut rng), &o) {
            Err(Error::NotConverged { report }) => {
                assert_eq!(report.iterations, 2);
                assert_eq!(report.residual_trace.len(), 2);
                assert!(!report.converged);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn default_iteration_budget() {
        assert_eq!(default_max_iter(1e-12, Some(0.0)), 100);
        assert_eq!(default_max_iter(1e-12, Some(0.5)), 400);
        assert_eq!(default_max_iter(1e-12, Some(1.0 - 1e-9)), 100_000);
        assert_eq!(default_max_iter(1e-12, None), 100_000);
    }

    #[test]
    fn two_by_two_joint_matches_grid_minimizer() {
        // Feasible 2x2 couplings with marginals (p, 1-p) and (r, 1-r) form the
        // segment q00 = s, q01 = p - s, q10 = r - s, q11 = 1 - p - r + s.
        let pi = kernel(&[&[0.3, 0.7], &[0.6, 0.4]]);
        let p0 = prob(&[0.35, 0.65]);
        let pt = prob(&[0.55, 0.45]);
        let prior = prior_joint(&prob(&[0.5, 0.5]), &pi).unwrap();
        let (p, r) = (0.35, 0.55);
        let lo = f64::max(0.0, p + r - 1.0);
        let hi = f64::min(p, r);
        let objective = |s: f64| {
            let q = DMatrix::from_row_slice(2, 2, &[s, p - s, r - s, 1.0 - p - r + s]);
            relative_entropy(&q, &prior).unwrap()
        };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..6 {
            let steps = 2000;
            let h = (b - a) / steps as f64;
            let best = (0..=steps)
                .map(|k| a + h * k as f64)
                .min_by(|x, y| objective(*x).total_cmp(&objective(*y)))
                .unwrap();
            a = (best - h).max(lo);
            b = (best + h).min(hi);
        }
        let s_grid = 0.5 * (a + b);
        let (pot, _) = solve_one_step(&pi, &p0, &pt, &opts()).unwrap();
        let q = one_step_joint(&pot, &pi);
        assert!((q[(0, 0)] - s_grid).abs() < 1e-9);
        assert!((relative_entropy(&q, &prior).unwrap() - objective(s_grid)).abs() < 1e-12);
    }
}
