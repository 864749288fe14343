/// Convergence record of a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// Hilbert-metric distance between successive iterates, one entry per iteration.
    pub residual_trace: Vec<f64>,
    pub final_residual: f64,
    /// Birkhoff bound `tanh(diameter / 4)` when the diameter is finite (or estimated).
    pub contraction_bound: Option<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub(crate) fn new(contraction_bound: Option<f64>) -> Self {
        SolveReport {
            contraction_bound,
            final_residual: f64::INFINITY,
            ..Default::default()
        }
    }

    pub(crate) fn push(&mut self, residual: f64) {
        self.residual_trace.push(residual);
        self.iterations = self.residual_trace.len();
        self.final_residual = residual;
    }

    /// Ratios `r[k+1] / r[k]` of successive residuals, starting at `burn_in`,
    /// restricted to steps whose next residual is still above `floor`.
    pub fn residual_ratios(&self, burn_in: usize, floor: f64) -> Vec<f64> {
        self.residual_trace
            .windows(2)
            .enumerate()
            .filter(|(k, w)| *k >= burn_in && w[1] > floor && w[0] > 0.0)
            .map(|(_, w)| w[1] / w[0])
            .collect()
    }
}
