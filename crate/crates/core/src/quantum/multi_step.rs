use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::general::solve_general_core;
use super::uniform::positivity_gate;
use super::{
    general_residuals, multistep_residuals, DensityMatrix, Gauge, KrausMap, QuantumBridgeResult,
    QuantumHarmonics, QuantumOptions,
};

/// Quantum bridge over `T` steps `ℰ†_0, …, ℰ†_{T−1}`.
///
/// The maps are composed into `ℰ†_{0:T}` (at most `opts.composition_cap`
/// coefficients), the one-step bridge is solved on the composition, and the
/// potentials are propagated: `φ̂_{t+1} = ℰ†_t(φ̂_t)` forward,
/// `φ_t = ℰ_t(φ_{t+1})` backward. Step `t` of the bridge has coefficients
/// `φ_{t+1}^{1/2} E_{t,j} φ_t^{-1/2}` and the intermediate densities are
/// `ρ_t = φ_t^{1/2} φ̂_t φ_t^{1/2}`.
pub fn multistep_bridge(
    maps: &[KrausMap],
    rho0: &DensityMatrix,
    rho_t: &DensityMatrix,
    opts: &QuantumOptions,
) -> Result<QuantumBridgeResult> {
    let composed = KrausMap::compose_sequence(maps, opts.composition_cap)?;
    let n = composed.dim();
    for rho in [rho0, rho_t] {
        if rho.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.dim(),
            });
        }
    }
    for m in maps {
        let dev = m.trace_preservation_error();
        if dev > super::TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
    }
    for (rho, which) in [(rho0, "initial"), (rho_t, "final")] {
        if rho.rank(linalg::MATFN_FLOOR) < n {
            return Err(Error::Unsupported(format!(
                "{which} marginal is rank deficient; multi-step bridges need positive definite marginals"
            )));
        }
    }
    let positivity = positivity_gate(&composed, opts)?;
    let solve = solve_general_core(&composed, rho0.matrix(), rho_t.matrix(), opts)?;
    let p = &solve.potentials;

    let horizon = maps.len();
    let mut phihat = Vec::with_capacity(horizon + 1);
    phihat.push(p.phihat0.clone());
    for m in maps {
        let next = m.apply_unchecked(phihat.last().unwrap());
        phihat.push(next);
    }
    let mut phi = vec![CMatrix::zeros(n, n); horizon + 1];
    phi[horizon] = p.phi_t.clone();
    for t in (0..horizon).rev() {
        phi[t] = maps[t].apply_adjoint_unchecked(&phi[t + 1]);
    }

    let roots = phi.iter().map(linalg::pd_sqrt).collect::<Result<Vec<_>>>()?;
    let inv_roots = phi.iter().map(linalg::pd_inv_sqrt).collect::<Result<Vec<_>>>()?;
    let steps: Vec<KrausMap> = maps
        .iter()
        .enumerate()
        .map(|(t, m)| m.conjugated(&roots[t + 1], &inv_roots[t]))
        .collect();
    let densities: Vec<CMatrix> = roots
        .iter()
        .zip(&phihat)
        .map(|(r, h)| linalg::hermitize(&(r * h * r)))
        .collect();

    let mut result = QuantumBridgeResult {
        transformed: solve.transformed,
        potentials: solve.potentials,
        steps,
        intermediate_densities: densities,
        harmonics: Some(QuantumHarmonics { phi, phihat }),
        report: solve.report,
        residuals: Default::default(),
        gauge: Gauge::Hermitian,
        positivity: Some(positivity),
    };
    let mut residuals = general_residuals(
        &composed,
        rho0.matrix(),
        rho_t.matrix(),
        &result.potentials,
        &result.transformed,
        opts.verify_tol,
    )?;
    residuals
        .entries
        .extend(multistep_residuals(maps, rho0.matrix(), rho_t.matrix(), &result, opts.verify_tol)?.entries);
    if !residuals.all_passed() {
        return Err(Error::VerificationFailed {
            table: residuals,
            report: Box::new(result.report),
        });
    }
    result.residuals = residuals;
    Ok(result)
}
