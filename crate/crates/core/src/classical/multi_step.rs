use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::report::SolveReport;

use super::one_step::{one_step_joint, solve_one_step, SchrodingerPotentials};
use super::types::{MarkovPrior, ProbabilityVector, StochasticMatrix};
use super::ClassicalOptions;

/// Space-time harmonics `φ(t,·)` (backward) and `φ̂(t,·)` (forward), `t = 0 … T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonics {
    pub phi: Vec<DVector<f64>>,
    pub phihat: Vec<DVector<f64>>,
}

/// Multi-step Schrödinger bridge for a Markov prior.
#[derive(Debug, Clone)]
pub struct BridgeSolution {
    pub potentials: SchrodingerPotentials,
    /// Endpoint joint law `q°₀T`.
    pub joint: DMatrix<f64>,
    /// Bridge kernels `Π°(t) = diag(φ(t))⁻¹ Π(t) diag(φ(t+1))`.
    pub step_kernels: Vec<StochasticMatrix>,
    /// Bridge marginals `q°_t = φ̂(t) ⊙ φ(t)`.
    pub marginals: Vec<ProbabilityVector>,
    pub harmonics: Harmonics,
    pub report: SolveReport,
}

impl BridgeSolution {
    /// Composition of the bridge kernels over `[t, t + n]`.
    pub fn window_transition(&self, t: usize, n: usize) -> DMatrix<f64> {
        let dim = self.joint.nrows();
        self.step_kernels[t..t + n]
            .iter()
            .fold(DMatrix::identity(dim, dim), |acc, k| acc * k.matrix())
    }
}

fn check_potential(v: &DVector<f64>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(**x >= 0.0)) {
        return Err(Error::NegativeEntry { index, value });
    }
    Ok(())
}

/// Propagates `φ` backward from `φ(T) = phi_t` and `φ̂` forward from
/// `φ̂(0) = phihat0`:
///
/// ```text
/// φ(t)     = Π(t) φ(t+1)
/// φ̂(t+1)  = Π(t)ᵀ φ̂(t)
/// ```
pub fn propagate_harmonics(
    prior: &MarkovPrior,
    phi_t: &DVector<f64>,
    phihat0: &DVector<f64>,
) -> Result<Harmonics> {
    let n = prior.dim();
    check_potential(phi_t, n)?;
    check_potential(phihat0, n)?;
    let horizon = prior.horizon();

    let mut phi = vec![DVector::zeros(n); horizon + 1];
    phi[horizon] = phi_t.clone();
    for t in (0..horizon).rev() {
        phi[t] = prior.kernels()[t].matrix() * &phi[t + 1];
    }

    let mut phihat = Vec::with_capacity(horizon + 1);
    phihat.push(phihat0.clone());
    for k in prior.kernels() {
        let next = k.matrix().tr_mul(phihat.last().unwrap());
        phihat.push(next);
    }
    Ok(Harmonics { phi, phihat })
}

/// Solves the bridge over `[0, T]` by reduction to the one-step problem on
/// `Π(0) ⋯ Π(T−1)`, then propagates the harmonics and transforms each kernel.
///
/// Positivity is required of the composed kernel only; intermediate kernels
/// may have zeros.
pub fn solve_bridge(
    prior: &MarkovPrior,
    p0: &ProbabilityVector,
    pt: &ProbabilityVector,
    opts: &ClassicalOptions,
) -> Result<BridgeSolution> {
    let composed = prior.composed_kernel();
    let (potentials, report) = solve_one_step(&composed, p0, pt, opts)?;
    let harmonics = propagate_harmonics(prior, &potentials.phi_t, &potentials.phihat0)?;

    let mut step_kernels = Vec::with_capacity(prior.horizon());
    for (t, k) in prior.kernels().iter().enumerate() {
        step_kernels.push(transform_kernel(k, &harmonics.phi[t], &harmonics.phi[t + 1]));
    }
    let marginals = harmonics
        .phi
        .iter()
        .zip(&harmonics.phihat)
        .map(|(phi, phihat)| ProbabilityVector::from_vector_unchecked(phi.component_mul(phihat)))
        .collect();
    let joint = one_step_joint(&potentials, &composed);
    Ok(BridgeSolution {
        potentials,
        joint,
        step_kernels,
        marginals,
        harmonics,
        report,
    })
}

/// `diag(φ(t))⁻¹ Π(t) diag(φ(t+1))`. States with `φ(t, x) = 0` carry no bridge
/// mass at time `t`; their rows keep the prior transition so that the kernel
/// stays stochastic.
pub(crate) fn transform_kernel(
    k: &StochasticMatrix,
    phi_now: &DVector<f64>,
    phi_next: &DVector<f64>,
) -> StochasticMatrix {
    let m = k.matrix();
    let n = m.nrows();
    let out = DMatrix::from_fn(n, n, |i, j| {
        if phi_now[i] > 0.0 {
            m[(i, j)] * phi_next[j] / phi_now[i]
        } else {
            m[(i, j)]
        }
    });
    StochasticMatrix::from_matrix_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::one_step::one_step_transition;
    use crate::random;

    fn opts() -> ClassicalOptions {
        ClassicalOptions::default()
    }

    #[test]
    fn identity_kernels_keep_harmonics_constant() {
        let prior = MarkovPrior::new(
            ProbabilityVector::uniform(3),
            vec![StochasticMatrix::identity(3); 4],
        )
        .unwrap();
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let h = propagate_harmonics(&prior, &v, &v).unwrap();
        assert!(h.phi.iter().all(|p| p == &v));
        assert!(h.phihat.iter().all(|p| p == &v));
    }

    #[test]
    fn stepwise_backward_propagation_matches_product() {
        let mut rng = random::seeded(17);
        let kernels: Vec<_> = (0..3).map(|_| random::positive_stochastic(3, &mut rng)).collect();
        let prior = MarkovPrior::new(random::probability(3, &mut rng), kernels.clone()).unwrap();
        let phi_t = DVector::from_vec(vec![0.3, 1.7, 0.9]);
        let h = propagate_harmonics(&prior, &phi_t, &phi_t).unwrap();
        let direct = kernels[0].matrix() * kernels[1].matrix() * kernels[2].matrix() * &phi_t;
        assert!((&h.phi[0] - direct).amax() < 1e-12);
        let direct_hat = (kernels[0].matrix() * kernels[1].matrix() * kernels[2].matrix()).tr_mul(&phi_t);
        assert!((&h.phihat[3] - direct_hat).amax() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let prior = MarkovPrior::new(ProbabilityVector::uniform(2), vec![StochasticMatrix::identity(2)]).unwrap();
        let v = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let w = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            propagate_harmonics(&prior, &v, &w),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn single_step_reduces_to_one_step_solver() {
        let mut rng = random::seeded(23);
        let k = random::positive_stochastic(4, &mut rng);
        let (p0, pt) = (random::probability(4, &mut rng), random::probability(4, &mut rng));
        let prior = MarkovPrior::new(p0.clone(), vec![k.clone()]).unwrap();
        let sol = solve_bridge(&prior, &p0, &pt, &opts()).unwrap();
        let (pot, _) = solve_one_step(&k, &p0, &pt, &opts()).unwrap();
        let direct = one_step_transition(&k, &pot).unwrap();
        assert!((sol.step_kernels[0].matrix() - direct.matrix()).amax() < 1e-13);
    }

    #[test]
    fn prior_marginals_reproduce_prior_kernels() {
        let mut rng = random::seeded(29);
        let kernels: Vec<_> = (0..3).map(|_| random::positive_stochastic(3, &mut rng)).collect();
        let prior = MarkovPrior::new(random::probability(3, &mut rng), kernels).unwrap();
        let marg = prior.marginals();
        let sol = solve_bridge(&prior, &marg[0], &marg[3], &opts()).unwrap();
        for (a, b) in sol.step_kernels.iter().zip(prior.kernels()) {
            assert!((a.matrix() - b.matrix()).amax() < 1e-10);
        }
        for (q, p) in sol.marginals.iter().zip(&marg) {
            assert!((q.as_vector() - p.as_vector()).amax() < 1e-10);
        }
    }

    #[test]
    fn two_state_two_step_endpoint_marginals() {
        let mut rng = random::seeded(31);
        let kernels: Vec<_> = (0..2).map(|_| random::positive_stochastic(2, &mut rng)).collect();
        let prior = MarkovPrior::new(ProbabilityVector::uniform(2), kernels).unwrap();
        let p0 = ProbabilityVector::new(vec![0.3, 0.7]).unwrap();
        let pt = ProbabilityVector::new(vec![0.6, 0.4]).unwrap();
        let sol = solve_bridge(&prior, &p0, &pt, &opts()).unwrap();
        let mut p = p0.as_vector().clone();
        for k in &sol.step_kernels {
            p = k.push_forward(&p);
        }
        assert!((p - pt.as_vector()).amax() < 1e-9);
        assert!((sol.marginals[2].as_vector() - pt.as_vector()).amax() < 1e-9);
    }

    #[test]
    fn intermediate_zeros_are_allowed_when_product_is_positive() {
        let k0 = StochasticMatrix::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]]).unwrap();
        let prior = MarkovPrior::new(ProbabilityVector::uniform(3), vec![k0.clone(), k0]).unwrap();
        let p0 = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let pt = ProbabilityVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        let sol = solve_bridge(&prior, &p0, &pt, &opts()).unwrap();
        for k in &sol.step_kernels {
            for row in k.matrix().row_iter() {
                assert!((row.sum() - 1.0).abs() < 1e-12);
            }
        }
        assert!((sol.marginals[2].as_vector() - pt.as_vector()).amax() < 1e-10);
    }
}
