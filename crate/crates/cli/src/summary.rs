//! Plain-text report.

use std::fmt::Write;

use crate::bundle::{Bundle, Real};
use crate::verify::Verification;

fn real(x: Real) -> String {
    format!("{:.3e}", x.0)
}

pub fn render(bundle: &Bundle) -> String {
    let mut out = String::new();
    let r = &bundle.report;
    let _ = writeln!(out, "kind:              {}", bundle.kind);
    let _ = writeln!(out, "status:            {}", bundle.status);
    if let Some(m) = &bundle.message {
        let _ = writeln!(out, "message:           {m}");
    }
    let _ = writeln!(out, "iterations:        {}", r.iterations);
    let _ = writeln!(out, "final residual:    {}", real(r.final_residual));
    match r.contraction_bound {
        Some(b) => {
            let _ = writeln!(out, "contraction bound: {b:.6}");
        }
        None => {
            let _ = writeln!(out, "contraction bound: none");
        }
    }
    if let Some(p) = bundle.solution.as_ref().and_then(|s| s.positivity.as_ref()) {
        let _ = writeln!(out, "positivity check:  {p}");
    }
    if let Some(d) = bundle.solution.as_ref().and_then(|s| s.relative_entropy) {
        let _ = writeln!(out, "relative entropy:  {:.12e}", d.0);
    }
    if !bundle.residuals.is_empty() {
        let _ = writeln!(out, "residuals:");
        let width = bundle.residuals.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for res in &bundle.residuals {
            let _ = writeln!(
                out,
                "  {:width$}  {:>10}  tol {:.0e}  {}",
                res.name,
                real(res.value),
                res.tolerance,
                if res.passed { "ok" } else { "FAIL" },
            );
        }
    }
    let _ = writeln!(out, "# iteration residual");
    for (i, x) in r.residual_trace.iter().enumerate() {
        let _ = writeln!(out, "{} {:e}", i + 1, x.0);
    }
    out
}

pub fn render_verification(bundle: &Bundle, v: &Verification) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind:   {}", bundle.kind);
    let _ = writeln!(out, "stored: {}", bundle.status);
    let width = v.recomputed.entries.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &v.recomputed.entries {
        let _ = writeln!(
            out,
            "  {:width$}  {:>10}  tol {:.0e}  {}",
            r.name,
            format!("{:.3e}", r.value),
            r.tolerance,
            if r.passed() { "ok" } else { "FAIL" },
        );
    }
    for m in &v.mismatches {
        let _ = writeln!(out, "  mismatch: {m}");
    }
    let _ = writeln!(out, "verification: {}", if v.passed() { "passed" } else { "FAILED" });
    out
}
