//! On-disk formats: input files and the JSON result bundle.
//!
//! Matrices are arrays of rows. Complex entries are `[re, im]` pairs; plain
//! numbers are accepted on input as real entries. Kraus maps are arrays of
//! matrices. Floats are written in shortest round-trip form, so a value read
//! back is bit-identical to the value written.

use std::fmt;
use std::path::Path;

use bridgekit::linalg::{CMatrix, CVector};
use bridgekit::{Complex64, DMatrix, DVector, KrausMap};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

pub const FORMAT: &str = "bridgekit-result";
pub const VERSION: u32 = 1;
/// Significant digits needed to round-trip any `f64`.
pub const PRECISION: u32 = 17;

/// A float that may be infinite or NaN; those are written as the strings
/// `"inf"`, `"-inf"` and `"nan"` since JSON has no literal for them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

/// A complex entry: `[re, im]`, or a bare number for a real entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        Entry::Pair([z.re, z.im])
    }
}

pub type RealMatrixJson = Vec<Vec<f64>>;
pub type ComplexMatrixJson = Vec<Vec<Entry>>;
pub type KrausJson = Vec<ComplexMatrixJson>;

fn rectangular<T>(rows: &[Vec<T>], what: &str) -> Result<(usize, usize), CliError> {
    let r = rows.len();
    if r == 0 {
        return Err(CliError::Input(format!("{what}: empty matrix")));
    }
    let c = rows[0].len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(CliError::Input(format!(
            "{what}: row {i} has {} entries, expected {c}",
            row.len()
        )));
    }
    Ok((r, c))
}

pub fn real_matrix(rows: &RealMatrixJson, what: &str) -> Result<DMatrix<f64>, CliError> {
    let (r, c) = rectangular(rows, what)?;
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn real_matrix_json(m: &DMatrix<f64>) -> RealMatrixJson {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_matrix(rows: &ComplexMatrixJson, what: &str) -> Result<CMatrix, CliError> {
    let (r, c) = rectangular(rows, what)?;
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j].into()))
}

pub fn complex_matrix_json(m: &CMatrix) -> ComplexMatrixJson {
    m.row_iter().map(|r| r.iter().map(|&z| z.into()).collect()).collect()
}

pub fn complex_vector(v: &[Entry]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&e| e.into()))
}

pub fn real_vector_json(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn kraus_coeffs(k: &KrausJson, what: &str) -> Result<Vec<CMatrix>, CliError> {
    k.iter()
        .enumerate()
        .map(|(i, m)| complex_matrix(m, &format!("{what} coefficient {i}")))
        .collect()
}

pub fn kraus_json(k: &KrausMap) -> KrausJson {
    k.coeffs().iter().map(complex_matrix_json).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ClassicalOneStep,
    ClassicalMultiStep,
    ClassicalSinkhorn,
    QuantumDoublyStochastic,
    QuantumBridge,
    QuantumPure,
    QuantumMultiStep,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verified,
    NotConverged,
    LeftCone,
    VerificationFailed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeArg {
    #[default]
    Hermitian,
    Triangular,
}

impl From<GaugeArg> for bridgekit::quantum::Gauge {
    fn from(g: GaugeArg) -> Self {
        match g {
            GaugeArg::Hermitian => bridgekit::quantum::Gauge::Hermitian,
            GaugeArg::Triangular => bridgekit::quantum::Gauge::Triangular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub gauge: GaugeArg,
    pub override_positivity_check: bool,
    pub verify_tol: f64,
}

/// Problem data, embedded so that a bundle verifies on its own.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<RealMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<RealMatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<KrausJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_steps: Option<Vec<KrausJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<ComplexMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_t: Option<ComplexMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_t: Option<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Potentials {
    Classical {
        phi0: Vec<f64>,
        phi_t: Vec<f64>,
        phihat0: Vec<f64>,
        phihat_t: Vec<f64>,
    },
    Quantum {
        phi0: ComplexMatrixJson,
        phi_t: ComplexMatrixJson,
        phihat0: ComplexMatrixJson,
        phihat_t: ComplexMatrixJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Harmonics {
    Classical { phi: Vec<Vec<f64>>, phihat: Vec<Vec<f64>> },
    Quantum { phi: Vec<ComplexMatrixJson>, phihat: Vec<ComplexMatrixJson> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Solution {
    pub potentials: Option<Potentials>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<RealMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_entropy: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<RealMatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_kernels: Option<Vec<RealMatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<Harmonics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transformed: Option<KrausJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<KrausJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<ComplexMatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: Real,
    pub contraction_bound: Option<f64>,
    pub residual_trace: Vec<Real>,
}

impl From<&bridgekit::SolveReport> for Report {
    fn from(r: &bridgekit::SolveReport) -> Self {
        Report {
            iterations: r.iterations,
            converged: r.converged,
            final_residual: Real(r.final_residual),
            contraction_bound: r.contraction_bound,
            residual_trace: r.residual_trace.iter().map(|&x| Real(x)).collect(),
        }
    }
}

impl From<&Report> for bridgekit::SolveReport {
    fn from(r: &Report) -> Self {
        bridgekit::SolveReport {
            iterations: r.iterations,
            converged: r.converged,
            final_residual: r.final_residual.0,
            contraction_bound: r.contraction_bound,
            residual_trace: r.residual_trace.iter().map(|x| x.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualJson {
    pub name: String,
    pub value: Real,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn residuals_json(t: &bridgekit::ResidualTable) -> Vec<ResidualJson> {
    t.entries
        .iter()
        .map(|r| ResidualJson {
            name: r.name.clone(),
            value: Real(r.value),
            tolerance: r.tolerance,
            passed: r.passed(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub format: String,
    pub version: u32,
    pub precision: u32,
    pub kind: Kind,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub solver: Solver,
    pub inputs: Inputs,
    pub solution: Option<Solution>,
    pub report: Report,
    pub residuals: Vec<ResidualJson>,
}

impl Bundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Bundle, CliError> {
        let bundle: Bundle = read_json(path)?;
        if bundle.format != FORMAT {
            return Err(CliError::Input(format!(
                "{}: not a result bundle (format {:?})",
                path.display(),
                bundle.format
            )));
        }
        if bundle.version != VERSION {
            return Err(CliError::Input(format!(
                "{}: unsupported bundle version {}",
                path.display(),
                bundle.version
            )));
        }
        Ok(bundle)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_accept_numbers_and_pairs() {
        let m: ComplexMatrixJson = serde_json::from_str("[[1, [0.5, -2]], [0, 3.25]]").unwrap();
        let c = complex_matrix(&m, "m").unwrap();
        assert_eq!(c[(0, 1)], Complex64::new(0.5, -2.0));
        assert_eq!(c[(1, 1)], Complex64::new(3.25, 0.0));
        let out = serde_json::to_string(&complex_matrix_json(&c)).unwrap();
        assert_eq!(out, "[[[1.0,0.0],[0.5,-2.0]],[[0.0,0.0],[3.25,0.0]]]");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let m: RealMatrixJson = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(real_matrix(&m, "kernel"), Err(CliError::Input(msg)) if msg.contains("row 1")));
    }

    #[test]
    fn non_finite_reals_round_trip() {
        let v = vec![Real(f64::INFINITY), Real(1.5), Real(f64::NEG_INFINITY)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[\"inf\",1.5,\"-inf\"]");
        let back: Vec<Real> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let x = [0.1 + 0.2, 1.0 / 3.0, 2f64.sqrt(), 1e-300, f64::MAX];
        let s = serde_json::to_string(&x).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
