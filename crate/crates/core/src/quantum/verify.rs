//! Residual tables certifying a quantum bridge. Shared by the solvers and by
//! independent re-verification of saved results.

use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::residual::ResidualTable;

use super::{Gauge, KrausMap, QuantumBridgeResult, QuantumPotentials};

/// Default tolerance for the bridge verification residuals.
pub const VERIFY_TOL: f64 = 1e-9;
/// Tolerance for the closed-form pure-state bridge.
pub const PURE_TOL: f64 = 1e-10;

/// Transformed coefficients `F_i = χ_T E_i χ₀⁻¹` with `χ† χ = φ` in the given gauge.
pub fn transformed_map(e: &KrausMap, potentials: &QuantumPotentials, gauge: Gauge) -> Result<KrausMap> {
    let chi_t = gauge.factor(&potentials.phi_t)?;
    let chi0_inv = linalg::inverse(&gauge.factor(&potentials.phi0)?)?;
    Ok(e.conjugated(&chi_t, &chi0_inv))
}

/// `χ φ̂ χ†` with the Hermitian root `χ = φ^{1/2}`.
fn factorized_density(phi: &CMatrix, phihat: &CMatrix) -> Result<CMatrix> {
    let chi = linalg::pd_sqrt(phi)?;
    Ok(linalg::hermitize(&(&chi * phihat * &chi)))
}

fn push_harmonics(table: &mut ResidualTable, e: &KrausMap, p: &QuantumPotentials, tol: f64) {
    table.push(
        "phi0_harmonic",
        linalg::rel_diff(&e.apply_adjoint_unchecked(&p.phi_t), &p.phi0),
        tol,
    );
    table.push(
        "phihat_t_harmonic",
        linalg::rel_diff(&e.apply_unchecked(&p.phihat0), &p.phihat_t),
        tol,
    );
}

/// Residuals of the uniform-marginal (doubly stochastic) Schrödinger system
/// and of the unital, trace-preserving transformed map `f`.
pub fn uniform_residuals(e: &KrausMap, p: &QuantumPotentials, f: &KrausMap, tol: f64) -> ResidualTable {
    let n = e.dim();
    let id = linalg::identity(n);
    let mut table = ResidualTable::new();
    push_harmonics(&mut table, e, p, tol);
    table.push("inverse_pair_0", linalg::rel_diff(&(&p.phihat0 * &p.phi0), &id), tol);
    table.push("inverse_pair_t", linalg::rel_diff(&(&p.phihat_t * &p.phi_t), &id), tol);
    table.push("f_trace_preserving", f.trace_preservation_error(), tol);
    table.push("f_unital", f.unitality_error(), tol);
    table
}

/// Residuals of the general-marginal Schrödinger system and the bridge conditions
/// `ℱ(I) = I`, `ℱ†(ρ₀) = ρ_T`.
pub fn general_residuals(
    e: &KrausMap,
    rho0: &CMatrix,
    rho_t: &CMatrix,
    p: &QuantumPotentials,
    f: &KrausMap,
    tol: f64,
) -> Result<ResidualTable> {
    let mut table = ResidualTable::new();
    push_harmonics(&mut table, e, p, tol);
    table.push(
        "rho0_factorization",
        linalg::rel_diff(&factorized_density(&p.phi0, &p.phihat0)?, rho0),
        tol,
    );
    table.push(
        "rhot_factorization",
        linalg::rel_diff(&factorized_density(&p.phi_t, &p.phihat_t)?, rho_t),
        tol,
    );
    push_bridge(&mut table, f, rho0, rho_t, tol);
    Ok(table)
}

fn push_bridge(table: &mut ResidualTable, f: &KrausMap, rho0: &CMatrix, rho_t: &CMatrix, tol: f64) {
    table.push("f_trace_preserving", f.trace_preservation_error(), tol);
    table.push("f_bridge", linalg::rel_diff(&f.apply_unchecked(rho0), rho_t), tol);
}

/// Bridge conditions for the pure-state construction.
pub fn pure_residuals(f: &KrausMap, rho0: &CMatrix, rho_t: &CMatrix, tol: f64) -> ResidualTable {
    let mut table = ResidualTable::new();
    push_bridge(&mut table, f, rho0, rho_t, tol);
    table
}

/// Per-step and end-to-end residuals of a multi-step bridge.
///
/// `steps` holds the original per-step maps `E_t`.
pub fn multistep_residuals(
    steps: &[KrausMap],
    rho0: &CMatrix,
    rho_t: &CMatrix,
    result: &QuantumBridgeResult,
    tol: f64,
) -> Result<ResidualTable> {
    let mut table = ResidualTable::new();
    let Some(h) = &result.harmonics else {
        return Ok(table);
    };
    for (t, (e, f)) in steps.iter().zip(&result.steps).enumerate() {
        table.push(
            format!("phi_recursion_{t}"),
            linalg::rel_diff(&e.apply_adjoint_unchecked(&h.phi[t + 1]), &h.phi[t]),
            tol,
        );
        table.push(
            format!("phihat_recursion_{t}"),
            linalg::rel_diff(&e.apply_unchecked(&h.phihat[t]), &h.phihat[t + 1]),
            tol,
        );
        table.push(format!("step_trace_preserving_{t}"), f.trace_preservation_error(), tol);
        table.push(
            format!("step_propagation_{t}"),
            linalg::rel_diff(
                &f.apply_unchecked(&result.intermediate_densities[t]),
                &result.intermediate_densities[t + 1],
            ),
            tol,
        );
    }
    for (t, rho) in result.intermediate_densities.iter().enumerate() {
        let w = linalg::eigvalsh(rho);
        table.push(format!("density_trace_{t}"), (rho.trace().re - 1.0).abs(), tol);
        table.push(format!("density_positivity_{t}"), (-w[0]).max(0.0), tol);
        table.push(format!("density_hermitian_{t}"), linalg::asymmetry(rho), tol);
    }
    let chained = result
        .steps
        .iter()
        .fold(rho0.clone(), |rho, f| f.apply_unchecked(&rho));
    // The end-to-end check compounds T steps of roundoff.
    table.push("chain_endpoint", linalg::rel_diff(&chained, rho_t), 10.0 * tol);
    table.push(
        "chain_start",
        linalg::rel_diff(&result.intermediate_densities[0], rho0),
        tol,
    );
    Ok(table)
}
