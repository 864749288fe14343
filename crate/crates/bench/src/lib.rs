//! Seeded workloads shared by the solver benchmarks.

use bridgekit::classical::{ProbabilityVector, StochasticMatrix};
use bridgekit::quantum::examples;
use bridgekit::{random, DensityMatrix, KrausMap};

/// Positive row-stochastic kernel of size `n`.
pub fn kernel(n: usize, seed: u64) -> StochasticMatrix {
    random::positive_stochastic(n, &mut random::seeded(seed))
}

/// Kernel with a pair of random endpoint marginals.
pub fn marginal_problem(n: usize, seed: u64) -> (StochasticMatrix, ProbabilityVector, ProbabilityVector) {
    let mut rng = random::seeded(seed);
    let k = random::positive_stochastic(n, &mut rng);
    let p0 = random::probability(n, &mut rng);
    let pt = random::probability(n, &mut rng);
    (k, p0, pt)
}

/// Random channel on `C^n` with `count` coefficients. `count > n` keeps it
/// positivity improving for generic draws.
pub fn channel(n: usize, count: usize, seed: u64) -> KrausMap {
    random::kraus_map(n, count, &mut random::seeded(seed))
}

/// Random channel with full-rank endpoint states.
pub fn quantum_problem(n: usize, count: usize, seed: u64) -> (KrausMap, DensityMatrix, DensityMatrix) {
    let mut rng = random::seeded(seed);
    let e = random::kraus_map(n, count, &mut rng);
    let rho0 = random::density_matrix(n, &mut rng);
    let rho_t = random::density_matrix(n, &mut rng);
    (e, rho0, rho_t)
}

/// Three-coefficient unital channel on a qubit.
pub fn reference_channel() -> KrausMap {
    examples::symmetric_three_coefficient_map()
}
