//! Runs one solver on problem data and packages the outcome as a [`Bundle`].

use bridgekit::classical::{
    bridge_residuals, one_step_joint, one_step_residuals, one_step_transition, prior_joint,
    relative_entropy, sinkhorn_doubly_stochastic, solve_bridge, solve_one_step, ClassicalOptions,
    MarkovPrior, ProbabilityVector, StochasticMatrix,
};
use bridgekit::quantum::{
    multistep_bridge, pure_state_bridge, solve_doubly_stochastic,
    solve_general_bridge, DensityMatrix, KrausMap, QuantumBridgeResult, QuantumOptions,
};
use bridgekit::{Error, ResidualTable, SolveReport};

use crate::bundle::*;
use crate::error::CliError;

/// Tolerance on the classical verification residuals.
pub const CLASSICAL_VERIFY_TOL: f64 = 1e-9;

/// A problem: kind, embedded inputs and solver settings.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: Kind,
    pub inputs: Inputs,
    pub solver: Solver,
}

impl Problem {
    fn classical_options(&self) -> ClassicalOptions {
        ClassicalOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            allow_zero_kernel: self.solver.override_positivity_check,
        }
    }

    fn quantum_options(&self) -> QuantumOptions {
        let defaults = QuantumOptions::default();
        QuantumOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter.unwrap_or(defaults.max_iter),
            gauge: self.solver.gauge.into(),
            override_positivity_check: self.solver.override_positivity_check,
            seed: self.solver.seed,
            verify_tol: self.solver.verify_tol,
            ..defaults
        }
    }
}

fn missing(what: &str) -> CliError {
    CliError::Input(format!("missing input: {what}"))
}

pub(crate) fn kernel(inputs: &Inputs) -> Result<StochasticMatrix, CliError> {
    let k = inputs.kernel.as_ref().ok_or_else(|| missing("kernel"))?;
    Ok(StochasticMatrix::new(real_matrix(k, "kernel")?)?)
}

/// Sinkhorn accepts any strictly positive matrix; rows are normalized first,
/// which does not change the doubly stochastic scaling.
pub(crate) fn sinkhorn_kernel(inputs: &Inputs) -> Result<StochasticMatrix, CliError> {
    let k = inputs.kernel.as_ref().ok_or_else(|| missing("kernel"))?;
    Ok(StochasticMatrix::normalize_rows(real_matrix(k, "kernel")?)?)
}

pub(crate) fn prior(inputs: &Inputs, p0: &ProbabilityVector) -> Result<MarkovPrior, CliError> {
    let ks = inputs.kernels.as_ref().ok_or_else(|| missing("kernels"))?;
    let kernels = ks
        .iter()
        .enumerate()
        .map(|(t, k)| Ok(StochasticMatrix::new(real_matrix(k, &format!("kernel {t}"))?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(MarkovPrior::new(p0.clone(), kernels)?)
}

pub(crate) fn marginal(v: &Option<Vec<f64>>, what: &str) -> Result<ProbabilityVector, CliError> {
    let v = v.as_ref().ok_or_else(|| missing(what))?;
    Ok(ProbabilityVector::new(v.clone())?)
}

pub(crate) fn kraus(k: &Option<KrausJson>, what: &str) -> Result<KrausMap, CliError> {
    let k = k.as_ref().ok_or_else(|| missing(what))?;
    Ok(KrausMap::new(kraus_coeffs(k, what)?)?)
}

pub(crate) fn kraus_steps(inputs: &Inputs) -> Result<Vec<KrausMap>, CliError> {
    let steps = inputs.kraus_steps.as_ref().ok_or_else(|| missing("kraus_steps"))?;
    steps
        .iter()
        .enumerate()
        .map(|(t, k)| Ok(KrausMap::new(kraus_coeffs(k, &format!("step {t}"))?)?))
        .collect()
}

pub(crate) fn density(m: &Option<ComplexMatrixJson>, what: &str) -> Result<DensityMatrix, CliError> {
    let m = m.as_ref().ok_or_else(|| missing(what))?;
    Ok(DensityMatrix::new(complex_matrix(m, what)?)?)
}

pub(crate) fn unit_vector(v: &Option<Vec<Entry>>, what: &str) -> Result<bridgekit::linalg::CVector, CliError> {
    Ok(complex_vector(v.as_ref().ok_or_else(|| missing(what))?))
}

/// What a solver produced before packaging.
struct Outcome {
    solution: Solution,
    report: SolveReport,
    residuals: ResidualTable,
}

/// Solver failures that still yield a bundle (exit status 2).
fn failed_bundle(problem: &Problem, err: &Error) -> Option<Bundle> {
    let (status, residuals) = match err {
        Error::NotConverged { .. } => (Status::NotConverged, ResidualTable::new()),
        Error::LeftCone { .. } => (Status::LeftCone, ResidualTable::new()),
        Error::VerificationFailed { table, .. } => (Status::VerificationFailed, table.clone()),
        _ => return None,
    };
    let report = err.report().expect("variant carries a report");
    Some(Bundle {
        format: FORMAT.into(),
        version: VERSION,
        precision: PRECISION,
        kind: problem.kind,
        status,
        message: Some(err.to_string()),
        solver: problem.solver.clone(),
        inputs: problem.inputs.clone(),
        solution: None,
        report: report.into(),
        residuals: residuals_json(&residuals),
    })
}

/// Runs the solver. Input and validation errors are returned as `Err`;
/// non-convergence and verification failures come back as a bundle whose
/// status says so.
pub fn run(problem: &Problem) -> Result<Bundle, CliError> {
    let result = match problem.kind {
        Kind::ClassicalOneStep => classical_one_step(problem),
        Kind::ClassicalMultiStep => classical_multi_step(problem),
        Kind::ClassicalSinkhorn => classical_sinkhorn(problem),
        Kind::QuantumDoublyStochastic => quantum(problem),
        Kind::QuantumBridge => quantum(problem),
        Kind::QuantumPure => quantum(problem),
        Kind::QuantumMultiStep => quantum(problem),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(CliError::Solver(err)) => {
            return failed_bundle(problem, &err).ok_or(CliError::Solver(err));
        }
        Err(e) => return Err(e),
    };
    let status = if outcome.residuals.all_passed() {
        Status::Verified
    } else {
        Status::VerificationFailed
    };
    Ok(Bundle {
        format: FORMAT.into(),
        version: VERSION,
        precision: PRECISION,
        kind: problem.kind,
        status,
        message: None,
        solver: problem.solver.clone(),
        inputs: problem.inputs.clone(),
        solution: Some(outcome.solution),
        report: (&outcome.report).into(),
        residuals: residuals_json(&outcome.residuals),
    })
}

fn classical_potentials(p: &bridgekit::SchrodingerPotentials) -> Potentials {
    Potentials::Classical {
        phi0: real_vector_json(&p.phi0),
        phi_t: real_vector_json(&p.phi_t),
        phihat0: real_vector_json(&p.phihat0),
        phihat_t: real_vector_json(&p.phihat_t),
    }
}

fn classical_one_step(problem: &Problem) -> Result<Outcome, CliError> {
    let pi = kernel(&problem.inputs)?;
    let p0 = marginal(&problem.inputs.p0, "p0")?;
    let pt = marginal(&problem.inputs.pt, "pt")?;
    let (pot, report) = solve_one_step(&pi, &p0, &pt, &problem.classical_options())?;
    let transition = one_step_transition(&pi, &pot)?;
    let joint = one_step_joint(&pot, &pi);
    let entropy = relative_entropy(&joint, &prior_joint(&p0, &pi)?)?;
    let residuals = one_step_residuals(&pi, &p0, &pt, &pot, transition.matrix(), problem.solver.verify_tol);
    Ok(Outcome {
        solution: Solution {
            potentials: Some(classical_potentials(&pot)),
            joint: Some(real_matrix_json(&joint)),
            relative_entropy: Some(Real(entropy)),
            transition: Some(real_matrix_json(transition.matrix())),
            ..Default::default()
        },
        report,
        residuals,
    })
}

fn classical_sinkhorn(problem: &Problem) -> Result<Outcome, CliError> {
    let pi = sinkhorn_kernel(&problem.inputs)?;
    let (scaled, pot, report) = sinkhorn_doubly_stochastic(&pi, &problem.classical_options())?;
    let uniform = ProbabilityVector::uniform(pi.dim());
    let residuals = one_step_residuals(&pi, &uniform, &uniform, &pot, scaled.matrix(), problem.solver.verify_tol);
    Ok(Outcome {
        solution: Solution {
            potentials: Some(classical_potentials(&pot)),
            transition: Some(real_matrix_json(scaled.matrix())),
            ..Default::default()
        },
        report,
        residuals,
    })
}

fn classical_multi_step(problem: &Problem) -> Result<Outcome, CliError> {
    let p0 = marginal(&problem.inputs.p0, "p0")?;
    let pt = marginal(&problem.inputs.pt, "pt")?;
    let prior = prior(&problem.inputs, &p0)?;
    let sol = solve_bridge(&prior, &p0, &pt, &problem.classical_options())?;
    let residuals = bridge_residuals(&prior, &p0, &pt, &sol, problem.solver.verify_tol);
    Ok(Outcome {
        solution: Solution {
            potentials: Some(classical_potentials(&sol.potentials)),
            joint: Some(real_matrix_json(&sol.joint)),
            step_kernels: Some(sol.step_kernels.iter().map(|k| real_matrix_json(k.matrix())).collect()),
            marginals: Some(sol.marginals.iter().map(|m| m.to_vec()).collect()),
            harmonics: Some(Harmonics::Classical {
                phi: sol.harmonics.phi.iter().map(real_vector_json).collect(),
                phihat: sol.harmonics.phihat.iter().map(real_vector_json).collect(),
            }),
            ..Default::default()
        },
        report: sol.report,
        residuals,
    })
}

fn quantum(problem: &Problem) -> Result<Outcome, CliError> {
    let inputs = &problem.inputs;
    let opts = problem.quantum_options();
    let result = match problem.kind {
        Kind::QuantumDoublyStochastic => solve_doubly_stochastic(&kraus(&inputs.kraus, "kraus")?, &opts)?,
        Kind::QuantumBridge => {
            let e = kraus(&inputs.kraus, "kraus")?;
            let rho0 = density(&inputs.rho0, "rho0")?;
            let rho_t = density(&inputs.rho_t, "rho_t")?;
            solve_general_bridge(&e, &rho0, &rho_t, &opts)?
        }
        Kind::QuantumPure => {
            let e = kraus(&inputs.kraus, "kraus")?;
            pure_state_bridge(&e, &unit_vector(&inputs.v0, "v0")?, &unit_vector(&inputs.v_t, "v_t")?)?
        }
        Kind::QuantumMultiStep => {
            let steps = kraus_steps(inputs)?;
            let rho0 = density(&inputs.rho0, "rho0")?;
            let rho_t = density(&inputs.rho_t, "rho_t")?;
            multistep_bridge(&steps, &rho0, &rho_t, &opts)?
        }
        _ => unreachable!("classical kinds are dispatched elsewhere"),
    };
    Ok(quantum_outcome(result))
}

fn quantum_outcome(r: QuantumBridgeResult) -> Outcome {
    let p = &r.potentials;
    let multi = !r.steps.is_empty();
    let solution = Solution {
        potentials: Some(Potentials::Quantum {
            phi0: complex_matrix_json(&p.phi0),
            phi_t: complex_matrix_json(&p.phi_t),
            phihat0: complex_matrix_json(&p.phihat0),
            phihat_t: complex_matrix_json(&p.phihat_t),
        }),
        transformed: Some(kraus_json(&r.transformed)),
        steps: multi.then(|| r.steps.iter().map(kraus_json).collect()),
        densities: multi.then(|| r.intermediate_densities.iter().map(complex_matrix_json).collect()),
        harmonics: r.harmonics.as_ref().map(|h| Harmonics::Quantum {
            phi: h.phi.iter().map(complex_matrix_json).collect(),
            phihat: h.phihat.iter().map(complex_matrix_json).collect(),
        }),
        positivity: r.positivity.as_ref().map(|c| c.describe()),
        ..Default::default()
    };
    Outcome {
        solution,
        report: r.report,
        residuals: r.residuals,
    }
}
