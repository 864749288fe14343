use nalgebra::{DMatrix, DVector};

use crate::residual::ResidualTable;

use super::multi_step::BridgeSolution;
use super::one_step::SchrodingerPotentials;
use super::types::{MarkovPrior, ProbabilityVector, StochasticMatrix};

/// Largest componentwise relative difference `|a − b| / max(|a|, |b|)`.
pub fn max_rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

fn is_uniform(p: &ProbabilityVector) -> bool {
    let u = 1.0 / p.len() as f64;
    p.as_slice().iter().all(|&x| (x - u).abs() <= 1e-15)
}

fn row_sum_deviation(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

fn column_sum_deviation(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max)
}

/// Residuals of the one-step Schrödinger system and of the derived bridge
/// kernel. Column sums are included when both marginals are uniform.
pub fn one_step_residuals(
    pi: &StochasticMatrix,
    p0: &ProbabilityVector,
    pt: &ProbabilityVector,
    potentials: &SchrodingerPotentials,
    transition: &DMatrix<f64>,
    tol: f64,
) -> ResidualTable {
    let m = pi.matrix();
    let mut table = ResidualTable::new();
    table.push("phi0_harmonic", max_rel_diff(&potentials.phi0, &(m * &potentials.phi_t)), tol);
    table.push(
        "phihat_t_harmonic",
        max_rel_diff(&potentials.phihat_t, &m.tr_mul(&potentials.phihat0)),
        tol,
    );
    table.push(
        "p0_factorization",
        max_abs_diff(&potentials.phi0.component_mul(&potentials.phihat0), p0.as_vector()),
        tol,
    );
    table.push(
        "pt_factorization",
        max_abs_diff(&potentials.phi_t.component_mul(&potentials.phihat_t), pt.as_vector()),
        tol,
    );
    let n = pi.dim();
    let expected = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * potentials.phi_t[j] / potentials.phi0[i]);
    table.push("transition_transform", (transition - expected).amax(), tol);
    table.push("transition_row_sums", row_sum_deviation(transition), tol);
    if is_uniform(p0) && is_uniform(pt) {
        table.push("transition_column_sums", column_sum_deviation(transition), tol);
    }
    let joint = DMatrix::from_fn(n, n, |i, j| potentials.phihat0[i] * m[(i, j)] * potentials.phi_t[j]);
    let rows = DVector::from_iterator(n, joint.row_iter().map(|r| r.sum()));
    let cols = DVector::from_iterator(n, joint.column_iter().map(|c| c.sum()));
    table.push("joint_row_marginal", max_abs_diff(&rows, p0.as_vector()), tol);
    table.push("joint_column_marginal", max_abs_diff(&cols, pt.as_vector()), tol);
    table
}

/// Residuals of a multi-step bridge: the one-step system on the composed
/// kernel, per-step harmonic recursions, transformed kernels, marginals and
/// the endpoint law of the assembled chain.
pub fn bridge_residuals(
    prior: &MarkovPrior,
    p0: &ProbabilityVector,
    pt: &ProbabilityVector,
    solution: &BridgeSolution,
    tol: f64,
) -> ResidualTable {
    let composed = prior.composed_kernel();
    let pot = &solution.potentials;
    let mut table = ResidualTable::new();
    let m = composed.matrix();
    table.push("phi0_harmonic", max_rel_diff(&pot.phi0, &(m * &pot.phi_t)), tol);
    table.push("phihat_t_harmonic", max_rel_diff(&pot.phihat_t, &m.tr_mul(&pot.phihat0)), tol);
    table.push("p0_factorization", max_abs_diff(&pot.phi0.component_mul(&pot.phihat0), p0.as_vector()), tol);
    table.push("pt_factorization", max_abs_diff(&pot.phi_t.component_mul(&pot.phihat_t), pt.as_vector()), tol);

    let h = &solution.harmonics;
    let horizon = prior.horizon();
    let mut phi_err = 0.0_f64;
    let mut phihat_err = 0.0_f64;
    let mut kernel_err = 0.0_f64;
    let mut rows_err = 0.0_f64;
    let mut marginal_err = 0.0_f64;
    for t in 0..horizon {
        let k = prior.kernels()[t].matrix();
        phi_err = phi_err.max(max_rel_diff(&h.phi[t], &(k * &h.phi[t + 1])));
        phihat_err = phihat_err.max(max_rel_diff(&h.phihat[t + 1], &k.tr_mul(&h.phihat[t])));
        let expected = super::multi_step::transform_kernel(&prior.kernels()[t], &h.phi[t], &h.phi[t + 1]);
        kernel_err = kernel_err.max((solution.step_kernels[t].matrix() - expected.matrix()).amax());
        rows_err = rows_err.max(row_sum_deviation(solution.step_kernels[t].matrix()));
    }
    for t in 0..=horizon {
        let q = h.phi[t].component_mul(&h.phihat[t]);
        marginal_err = marginal_err.max(max_abs_diff(&q, solution.marginals[t].as_vector()));
    }
    table.push("phi_recursion", phi_err, tol);
    table.push("phihat_recursion", phihat_err, tol);
    table.push("step_kernel_transform", kernel_err, tol);
    table.push("step_kernel_row_sums", rows_err, tol);
    table.push("marginal_factorization", marginal_err, tol);
    table.push("marginal_start", max_abs_diff(solution.marginals[0].as_vector(), p0.as_vector()), tol);
    table.push("marginal_end", max_abs_diff(solution.marginals[horizon].as_vector(), pt.as_vector()), tol);

    let mut p = p0.as_vector().clone();
    for k in &solution.step_kernels {
        p = k.push_forward(&p);
    }
    table.push("chain_endpoint", max_abs_diff(&p, pt.as_vector()), tol);
    table
}
