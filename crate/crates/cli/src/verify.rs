//! Independent re-check of a stored bundle: every residual is recomputed from
//! the embedded inputs and the emitted solution with the same functions the
//! solvers use.

use bridgekit::classical::{
    bridge_residuals, one_step_residuals, BridgeSolution, Harmonics as ClassicalHarmonics,
    ProbabilityVector, SchrodingerPotentials, StochasticMatrix,
};
use bridgekit::linalg::{self, CMatrix};
use bridgekit::quantum::{
    general_residuals, multistep_residuals, pure_residuals, uniform_residuals, Gauge, KrausMap,
    QuantumBridgeResult, QuantumHarmonics, QuantumPotentials, PURE_TOL,
};
use bridgekit::{DMatrix, DVector, ResidualTable};

use crate::bundle::*;
use crate::error::CliError;
use crate::run::{density, kernel, kraus, kraus_steps, marginal, prior, sinkhorn_kernel, unit_vector};

/// Stored residuals must be reproduced to this absolute accuracy.
pub const REPRODUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Verification {
    pub recomputed: ResidualTable,
    /// Stored residuals whose recomputed value differs, or that are absent.
    pub mismatches: Vec<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.recomputed.all_passed() && self.mismatches.is_empty()
    }
}

fn missing(what: &str) -> CliError {
    CliError::Input(format!("bundle is missing {what}"))
}

fn classical_potentials(s: &Solution) -> Result<SchrodingerPotentials, CliError> {
    match s.potentials.as_ref().ok_or_else(|| missing("solution.potentials"))? {
        Potentials::Classical {
            phi0,
            phi_t,
            phihat0,
            phihat_t,
        } => Ok(SchrodingerPotentials {
            phi0: DVector::from_vec(phi0.clone()),
            phi_t: DVector::from_vec(phi_t.clone()),
            phihat0: DVector::from_vec(phihat0.clone()),
            phihat_t: DVector::from_vec(phihat_t.clone()),
        }),
        Potentials::Quantum { .. } => Err(CliError::Input("expected vector potentials".into())),
    }
}

fn quantum_potentials(s: &Solution) -> Result<QuantumPotentials, CliError> {
    match s.potentials.as_ref().ok_or_else(|| missing("solution.potentials"))? {
        Potentials::Quantum {
            phi0,
            phi_t,
            phihat0,
            phihat_t,
        } => Ok(QuantumPotentials {
            phi0: complex_matrix(phi0, "phi0")?,
            phi_t: complex_matrix(phi_t, "phi_t")?,
            phihat0: complex_matrix(phihat0, "phihat0")?,
            phihat_t: complex_matrix(phihat_t, "phihat_t")?,
        }),
        Potentials::Classical { .. } => Err(CliError::Input("expected matrix potentials".into())),
    }
}

fn matrix_field(m: &Option<RealMatrixJson>, what: &str) -> Result<DMatrix<f64>, CliError> {
    real_matrix(m.as_ref().ok_or_else(|| missing(what))?, what)
}

fn transformed(s: &Solution) -> Result<KrausMap, CliError> {
    let k = s.transformed.as_ref().ok_or_else(|| missing("solution.transformed"))?;
    Ok(KrausMap::from_coeffs_unchecked(kraus_coeffs(k, "transformed")?)?)
}

/// Recomputes the residual table of a bundle.
pub fn recompute(bundle: &Bundle) -> Result<ResidualTable, CliError> {
    let s = bundle
        .solution
        .as_ref()
        .ok_or_else(|| missing("a solution (the run did not produce one)"))?;
    let inputs = &bundle.inputs;
    let tol = bundle.solver.verify_tol;
    let table = match bundle.kind {
        Kind::ClassicalOneStep | Kind::ClassicalSinkhorn => {
            let (pi, p0, pt) = if bundle.kind == Kind::ClassicalSinkhorn {
                let pi = sinkhorn_kernel(inputs)?;
                let u = ProbabilityVector::uniform(pi.dim());
                (pi, u.clone(), u)
            } else {
                (kernel(inputs)?, marginal(&inputs.p0, "p0")?, marginal(&inputs.pt, "pt")?)
            };
            let pot = classical_potentials(s)?;
            let transition = matrix_field(&s.transition, "solution.transition")?;
            one_step_residuals(&pi, &p0, &pt, &pot, &transition, tol)
        }
        Kind::ClassicalMultiStep => {
            let p0 = marginal(&inputs.p0, "p0")?;
            let pt = marginal(&inputs.pt, "pt")?;
            let prior = prior(inputs, &p0)?;
            let step_kernels = s
                .step_kernels
                .as_ref()
                .ok_or_else(|| missing("solution.step_kernels"))?
                .iter()
                .map(|k| real_matrix(k, "step kernel").map(StochasticMatrix::from_matrix_unchecked))
                .collect::<Result<Vec<_>, _>>()?;
            let marginals = s
                .marginals
                .as_ref()
                .ok_or_else(|| missing("solution.marginals"))?
                .iter()
                .map(|m| ProbabilityVector::from_vector_unchecked(DVector::from_vec(m.clone())))
                .collect();
            let harmonics = match s.harmonics.as_ref().ok_or_else(|| missing("solution.harmonics"))? {
                Harmonics::Classical { phi, phihat } => ClassicalHarmonics {
                    phi: phi.iter().map(|v| DVector::from_vec(v.clone())).collect(),
                    phihat: phihat.iter().map(|v| DVector::from_vec(v.clone())).collect(),
                },
                Harmonics::Quantum { .. } => return Err(CliError::Input("expected vector harmonics".into())),
            };
            check_lengths(prior.horizon(), step_kernels.len(), harmonics.phi.len(), harmonics.phihat.len())?;
            let solution = BridgeSolution {
                potentials: classical_potentials(s)?,
                joint: matrix_field(&s.joint, "solution.joint")?,
                step_kernels,
                marginals,
                harmonics,
                report: (&bundle.report).into(),
            };
            if solution.marginals.len() != prior.horizon() + 1 {
                return Err(CliError::Input("solution.marginals has the wrong length".into()));
            }
            bridge_residuals(&prior, &p0, &pt, &solution, tol)
        }
        Kind::QuantumDoublyStochastic => {
            let e = kraus(&inputs.kraus, "kraus")?;
            uniform_residuals(&e, &quantum_potentials(s)?, &transformed(s)?, tol)
        }
        Kind::QuantumBridge => {
            let e = kraus(&inputs.kraus, "kraus")?;
            let rho0 = density(&inputs.rho0, "rho0")?;
            let rho_t = density(&inputs.rho_t, "rho_t")?;
            general_residuals(&e, rho0.matrix(), rho_t.matrix(), &quantum_potentials(s)?, &transformed(s)?, tol)?
        }
        Kind::QuantumPure => {
            let rho0 = linalg::outer(&unit_vector(&inputs.v0, "v0")?);
            let rho_t = linalg::outer(&unit_vector(&inputs.v_t, "v_t")?);
            pure_residuals(&transformed(s)?, &rho0, &rho_t, PURE_TOL)
        }
        Kind::QuantumMultiStep => {
            let maps = kraus_steps(inputs)?;
            let composed = KrausMap::compose_sequence(&maps, usize::MAX)?;
            let rho0 = density(&inputs.rho0, "rho0")?;
            let rho_t = density(&inputs.rho_t, "rho_t")?;
            let potentials = quantum_potentials(s)?;
            let f = transformed(s)?;
            let mut table = general_residuals(&composed, rho0.matrix(), rho_t.matrix(), &potentials, &f, tol)?;
            let steps = s
                .steps
                .as_ref()
                .ok_or_else(|| missing("solution.steps"))?
                .iter()
                .map(|k| Ok(KrausMap::from_coeffs_unchecked(kraus_coeffs(k, "step")?)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            let matrices = |v: &Vec<ComplexMatrixJson>, what: &str| -> Result<Vec<CMatrix>, CliError> {
                v.iter().map(|m| complex_matrix(m, what)).collect()
            };
            let densities = matrices(s.densities.as_ref().ok_or_else(|| missing("solution.densities"))?, "density")?;
            let harmonics = match s.harmonics.as_ref().ok_or_else(|| missing("solution.harmonics"))? {
                Harmonics::Quantum { phi, phihat } => QuantumHarmonics {
                    phi: matrices(phi, "phi")?,
                    phihat: matrices(phihat, "phihat")?,
                },
                Harmonics::Classical { .. } => return Err(CliError::Input("expected matrix harmonics".into())),
            };
            check_lengths(maps.len(), steps.len(), harmonics.phi.len(), harmonics.phihat.len())?;
            if densities.len() != maps.len() + 1 {
                return Err(CliError::Input("solution.densities has the wrong length".into()));
            }
            let result = QuantumBridgeResult {
                transformed: f,
                potentials,
                steps,
                intermediate_densities: densities,
                harmonics: Some(harmonics),
                report: (&bundle.report).into(),
                residuals: ResidualTable::new(),
                gauge: Gauge::Hermitian,
                positivity: None,
            };
            table
                .entries
                .extend(multistep_residuals(&maps, rho0.matrix(), rho_t.matrix(), &result, tol)?.entries);
            table
        }
    };
    Ok(table)
}

fn check_lengths(horizon: usize, steps: usize, phi: usize, phihat: usize) -> Result<(), CliError> {
    if steps != horizon || phi != horizon + 1 || phihat != horizon + 1 {
        return Err(CliError::Input(format!(
            "solution has {steps} steps and {phi}/{phihat} harmonics for a horizon of {horizon}"
        )));
    }
    Ok(())
}

/// Recomputes every residual and compares with the stored table.
pub fn verify(bundle: &Bundle) -> Result<Verification, CliError> {
    let recomputed = recompute(bundle)?;
    let mut mismatches = Vec::new();
    for stored in &bundle.residuals {
        match recomputed.entries.iter().find(|r| r.name == stored.name) {
            Some(r) => {
                let same = (r.value - stored.value.0).abs() <= REPRODUCTION_TOL
                    || (r.value.is_infinite() && r.value == stored.value.0);
                if !same {
                    mismatches.push(format!(
                        "{}: stored {:e}, recomputed {:e}",
                        stored.name, stored.value.0, r.value
                    ));
                }
            }
            None => mismatches.push(format!("{}: not produced on recomputation", stored.name)),
        }
    }
    for r in &recomputed.entries {
        if !bundle.residuals.iter().any(|s| s.name == r.name) {
            mismatches.push(format!("{}: missing from the stored table", r.name));
        }
    }
    Ok(Verification { recomputed, mismatches })
}
