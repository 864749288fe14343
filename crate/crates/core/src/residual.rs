/// A named verification residual and the tolerance it is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.tolerance
    }
}

/// Ordered collection of residuals recomputed from a solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualTable {
    pub entries: Vec<Residual>,
}

impl ResidualTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.entries.push(Residual {
            name: name.into(),
            value,
            tolerance,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(Residual::passed)
    }

    /// Names of residuals at or above their tolerance.
    pub fn failures(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|r| !r.passed())
            .map(|r| format!("{} = {:e} (tol {:e})", r.name, r.value, r.tolerance))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}
