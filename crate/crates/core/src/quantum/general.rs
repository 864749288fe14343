use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, MATFN_FLOOR};

use super::iteration::{estimated_rate, fixed_point};
use super::uniform::positivity_gate;
use super::{
    general_residuals, pure_residuals, transformed_map, DensityMatrix, Gauge, KrausMap,
    QuantumBridgeResult, QuantumOptions, QuantumPotentials, PURE_TOL,
};

fn require_full_rank(rho: &DensityMatrix, which: &str) -> Result<()> {
    let n = rho.dim();
    match rho.rank(MATFN_FLOOR) {
        r if r == n => Ok(()),
        1 => Err(Error::Unsupported(format!(
            "{which} marginal is a pure state; use the pure-state bridge"
        ))),
        r => Err(Error::Unsupported(format!(
            "{which} marginal has rank {r} < {n}; mix in a small multiple of the identity"
        ))),
    }
}

/// `φ_T = (ρ^{1/2} (ρ^{-1/2} φ̂⁻¹ ρ^{-1/2})^{1/2} ρ^{1/2})²`, the unique positive
/// definite solution of `φ_T^{1/2} φ̂_T φ_T^{1/2} = ρ_T`.
pub(crate) struct TerminalMap {
    rho_sqrt: CMatrix,
    rho_inv_sqrt: CMatrix,
}

impl TerminalMap {
    pub(crate) fn new(rho: &CMatrix) -> Result<Self> {
        Ok(TerminalMap {
            rho_sqrt: linalg::pd_sqrt(rho)?,
            rho_inv_sqrt: linalg::pd_inv_sqrt(rho)?,
        })
    }

    pub(crate) fn apply(&self, phihat_t: &CMatrix) -> Result<CMatrix> {
        let inner = linalg::hermitize(&(&self.rho_inv_sqrt * linalg::pd_inverse(phihat_t)? * &self.rho_inv_sqrt));
        let s = linalg::hermitize(&(&self.rho_sqrt * linalg::pd_sqrt(&inner)? * &self.rho_sqrt));
        Ok(linalg::hermitize(&(&s * &s)))
    }
}

/// `φ̂₀ = φ₀^{-1/2} ρ₀ φ₀^{-1/2}`, so that `φ₀^{1/2} φ̂₀ φ₀^{1/2} = ρ₀`.
pub(crate) fn initial_map(phi0: &CMatrix, rho0: &CMatrix) -> Result<CMatrix> {
    let r = linalg::pd_inv_sqrt(phi0)?;
    Ok(linalg::hermitize(&(&r * rho0 * &r)))
}

pub(crate) struct GeneralSolve {
    pub potentials: QuantumPotentials,
    pub transformed: KrausMap,
    pub report: crate::report::SolveReport,
}

/// Iterates `φ̂₀ → ℰ†(φ̂₀) → D_T → ℰ → D̂₀` to a fixed point and assembles the
/// potentials and the transformed map. Verification is left to the caller.
pub(crate) fn solve_general_core(
    e: &KrausMap,
    rho0: &CMatrix,
    rho_t: &CMatrix,
    opts: &QuantumOptions,
) -> Result<GeneralSolve> {
    if opts.gauge != Gauge::Hermitian {
        return Err(Error::Unsupported(
            "general-marginal bridges are defined with Hermitian roots only".into(),
        ));
    }
    let terminal = TerminalMap::new(rho_t)?;
    let rate = estimated_rate(e, opts);
    let step = |phihat0: &CMatrix| -> Result<CMatrix> {
        let phi_t = terminal.apply(&e.apply_unchecked(phihat0))?;
        initial_map(&e.apply_adjoint_unchecked(&phi_t), rho0)
    };
    let (x, report) = fixed_point(e.dim(), step, opts, rate)?;

    let left_cone = |m: &CMatrix| Error::LeftCone {
        iteration: report.iterations,
        iterate: Box::new(m.clone()),
        report: Box::new(report.clone()),
    };
    let phi_t = terminal.apply(&e.apply_unchecked(&x)).map_err(|_| left_cone(&x))?;
    let phi0 = e.apply_adjoint_unchecked(&phi_t);
    let phihat0 = initial_map(&phi0, rho0).map_err(|_| left_cone(&phi0))?;
    let phihat_t = e.apply_unchecked(&phihat0);
    let potentials = QuantumPotentials {
        phi0,
        phi_t,
        phihat0,
        phihat_t,
    };
    let transformed = transformed_map(e, &potentials, Gauge::Hermitian)?;
    Ok(GeneralSolve {
        potentials,
        transformed,
        report,
    })
}

/// Quantum bridge between two positive definite densities.
///
/// Existence of the fixed point is not guaranteed by theory, so the result is
/// accepted only after the full Schrödinger system and the bridge conditions
/// verify within `opts.verify_tol`. Non-convergence is reported with the
/// residual trace.
pub fn solve_general_bridge(
    e: &KrausMap,
    rho0: &DensityMatrix,
    rho_t: &DensityMatrix,
    opts: &QuantumOptions,
) -> Result<QuantumBridgeResult> {
    for rho in [rho0, rho_t] {
        if rho.dim() != e.dim() {
            return Err(Error::DimensionMismatch {
                expected: e.dim(),
                found: rho.dim(),
            });
        }
    }
    require_full_rank(rho0, "initial")?;
    require_full_rank(rho_t, "final")?;
    let positivity = positivity_gate(e, opts)?;
    let solve = solve_general_core(e, rho0.matrix(), rho_t.matrix(), opts)?;
    let residuals = general_residuals(
        e,
        rho0.matrix(),
        rho_t.matrix(),
        &solve.potentials,
        &solve.transformed,
        opts.verify_tol,
    )?;
    if !residuals.all_passed() {
        return Err(Error::VerificationFailed {
            table: residuals,
            report: Box::new(solve.report),
        });
    }
    log::info!(
        "general bridge converged in {} iterations (residual {:e})",
        solve.report.iterations,
        solve.report.final_residual
    );
    Ok(QuantumBridgeResult {
        transformed: solve.transformed,
        potentials: solve.potentials,
        steps: Vec::new(),
        intermediate_densities: Vec::new(),
        harmonics: None,
        report: solve.report,
        residuals,
        gauge: Gauge::Hermitian,
        positivity: Some(positivity),
    })
}

/// Closed-form bridge between pure states `v₀v₀†` and `v_Tv_T†`:
/// `φ_T = v_Tv_T†`, `φ₀ = ℰ(φ_T)` and `F_i = φ_T E_i φ₀^{-1/2}`.
///
/// `φ_T` lies on the boundary of the cone and is never inverted; only
/// `φ₀` must be positive definite.
pub fn pure_state_bridge(e: &KrausMap, v0: &CVector, v_t: &CVector) -> Result<QuantumBridgeResult> {
    let rho0 = DensityMatrix::pure(v0)?.into_inner();
    let rho_t = DensityMatrix::pure(v_t)?.into_inner();
    for n in [rho0.nrows(), rho_t.nrows()] {
        if n != e.dim() {
            return Err(Error::DimensionMismatch {
                expected: e.dim(),
                found: n,
            });
        }
    }
    let phi_t = rho_t.clone();
    let phi0 = e.apply_adjoint_unchecked(&phi_t);
    let phi0_inv_sqrt = linalg::pd_inv_sqrt(&phi0).map_err(|err| {
        Error::NotPositivityImproving(format!("ℰ(v_T v_T†) is singular: {err}"))
    })?;
    let phihat0 = linalg::hermitize(&(&phi0_inv_sqrt * &rho0 * &phi0_inv_sqrt));
    let phihat_t = e.apply_unchecked(&phihat0);
    let transformed = e.conjugated(&phi_t, &phi0_inv_sqrt);
    let residuals = pure_residuals(&transformed, &rho0, &rho_t, PURE_TOL);
    let report = crate::report::SolveReport {
        converged: true,
        final_residual: 0.0,
        ..Default::default()
    };
    if !residuals.all_passed() {
        return Err(Error::VerificationFailed {
            table: residuals,
            report: Box::new(report),
        });
    }
    Ok(QuantumBridgeResult {
        transformed,
        potentials: QuantumPotentials {
            phi0,
            phi_t,
            phihat0,
            phihat_t,
        },
        steps: Vec::new(),
        intermediate_densities: Vec::new(),
        harmonics: None,
        report,
        residuals,
        gauge: Gauge::Hermitian,
        positivity: None,
    })
}
