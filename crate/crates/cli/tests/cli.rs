use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bridgekit_cli::bundle::{Bundle, Potentials, Status};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bridgekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgekit"))
        .args(args)
        .env_remove("BRIDGEKIT_LOG")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs a subcommand with `--output` into `dir` and returns the exit code and bundle path.
fn solve(dir: &Path, name: &str, args: &[&str]) -> (i32, PathBuf) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--output", path_str(&out)]);
    let o = bridgekit(&full);
    (o.status.code().unwrap(), out)
}

fn quantum_bridge_args() -> Vec<String> {
    vec![
        "quantum-bridge".into(),
        "--kraus".into(),
        data("symmetric_kraus.json").display().to_string(),
        "--rho0".into(),
        data("rho_quarter.json").display().to_string(),
        "--rhot".into(),
        data("rho_two_thirds.json").display().to_string(),
    ]
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn sinkhorn_on_positive_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let k = data("positive2.json");
    let (code, path) = solve(dir.path(), "s.json", &["classical-sinkhorn", "--kernel", path_str(&k)]);
    assert_eq!(code, 0);
    let b = Bundle::read(&path).unwrap();
    assert_eq!(b.status, Status::Verified);
    let t = b.solution.unwrap().transition.unwrap();
    for i in 0..2 {
        assert!((t[i][0] + t[i][1] - 1.0).abs() < 1e-12);
        assert!((t[0][i] + t[1][i] - 1.0).abs() < 1e-12);
    }
    assert!(b.residuals.iter().any(|r| r.name == "transition_column_sums"));
}

#[test]
fn quantum_bridge_reproduces_nonuniform_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, path) = solve(dir.path(), "q.json", &as_strs(&quantum_bridge_args()));
    assert_eq!(code, 0);
    let b = Bundle::read(&path).unwrap();
    let Some(Potentials::Quantum { phi0, phihat0, .. }) = b.solution.unwrap().potentials else {
        panic!("matrix potentials expected");
    };
    let re = |m: &Vec<Vec<bridgekit_cli::bundle::Entry>>, i: usize, j: usize| {
        let z: bridgekit::Complex64 = m[i][j].into();
        z.re
    };
    assert!((re(&phi0, 0, 0) - 0.5).abs() < 1e-9 && (re(&phi0, 1, 1) - 0.5).abs() < 1e-9);
    assert!((re(&phihat0, 0, 0) - 0.5).abs() < 1e-9 && (re(&phihat0, 1, 1) - 1.5).abs() < 1e-9);
}

#[test]
fn single_coefficient_map_is_an_input_error() {
    let o = bridgekit(&["quantum-doubly-stochastic", "--kraus", path_str(&data("identity_kraus.json"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("positivity improving"), "{err}");
}

#[test]
fn malformed_and_invalid_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[[1, 2], [3").unwrap();
    let o = bridgekit(&["classical-sinkhorn", "--kernel", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    // Marginal that does not sum to one.
    let p = dir.path().join("p.json");
    std::fs::write(&p, "[0.5, 0.6, 0.1]").unwrap();
    let k = data("kernel3.json");
    let o = bridgekit(&["classical-one-step", "--kernel", path_str(&k), "--p0", path_str(&p), "--pt", path_str(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sums to"));
    let o = bridgekit(&["classical-sinkhorn", "--kernel", path_str(&k), "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2), "clap usage errors exit with 2");
}

#[test]
fn every_kind_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (k, p0, pt) = (data("kernel3.json"), data("p0_3.json"), data("pt_3.json"));
    let ks = data("kernels3.json");
    let e = data("symmetric_kraus.json");
    let (r0, r1) = (data("rho_mixed_complex.json"), data("rho_two_thirds.json"));
    let steps = data("kraus_steps.json");
    let (e0, e1) = (data("e0.json"), data("e1.json"));
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("one.json", vec!["classical-one-step", "--kernel", path_str(&k), "--p0", path_str(&p0), "--pt", path_str(&pt)]),
        ("multi.json", vec!["classical-multi-step", "--kernels", path_str(&ks), "--p0", path_str(&p0), "--pt", path_str(&pt)]),
        ("sink.json", vec!["classical-sinkhorn", "--kernel", path_str(&k)]),
        ("ds.json", vec!["quantum-doubly-stochastic", "--kraus", path_str(&e)]),
        ("qb.json", vec!["quantum-bridge", "--kraus", path_str(&e), "--rho0", path_str(&r0), "--rhot", path_str(&r1)]),
        ("pure.json", vec!["quantum-pure", "--kraus", path_str(&e), "--v0", path_str(&e0), "--vt", path_str(&e1)]),
        ("qm.json", vec!["quantum-multi-step", "--kraus-steps", path_str(&steps), "--rho0", path_str(&r0), "--rhot", path_str(&r1)]),
    ];
    for (name, args) in runs {
        let (code, path) = solve(dir.path(), name, &args);
        assert_eq!(code, 0, "{name}");
        let o = bridgekit(&["verify", path_str(&path)]);
        let text = String::from_utf8_lossy(&o.stdout);
        assert_eq!(o.status.code(), Some(0), "{name}: {text}");
        assert!(text.contains("verification: passed"));
    }
}

#[test]
fn tampered_potential_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (code, path) = solve(dir.path(), "q.json", &as_strs(&quantum_bridge_args()));
    assert_eq!(code, 0);
    let mut b = Bundle::read(&path).unwrap();
    if let Some(Potentials::Quantum { phi0, .. }) = b.solution.as_mut().unwrap().potentials.as_mut() {
        phi0[0][0] = bridgekit_cli::bundle::Entry::Pair([0.5 + 1e-3, 0.0]);
    }
    let tampered = dir.path().join("t.json");
    std::fs::write(&tampered, b.to_json()).unwrap();
    let o = bridgekit(&["verify", path_str(&tampered)]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("phi0_harmonic") && text.contains("FAIL"), "{text}");

    let (k, p0, pt) = (data("kernel3.json"), data("p0_3.json"), data("pt_3.json"));
    let (code, path) = solve(
        dir.path(),
        "c.json",
        &["classical-one-step", "--kernel", path_str(&k), "--p0", path_str(&p0), "--pt", path_str(&pt)],
    );
    assert_eq!(code, 0);
    let mut b = Bundle::read(&path).unwrap();
    if let Some(Potentials::Classical { phi0, .. }) = b.solution.as_mut().unwrap().potentials.as_mut() {
        phi0[0] += 1e-3;
    }
    std::fs::write(&tampered, b.to_json()).unwrap();
    let o = bridgekit(&["verify", path_str(&tampered)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("p0_factorization"));
}

#[test]
fn uniform_quantum_marginals_include_doubly_stochastic_checks() {
    let dir = tempfile::tempdir().unwrap();
    let e = data("symmetric_kraus.json");
    let (code, path) = solve(dir.path(), "ds.json", &["quantum-doubly-stochastic", "--kraus", path_str(&e)]);
    assert_eq!(code, 0);
    let b = Bundle::read(&path).unwrap();
    for name in ["f_unital", "f_trace_preserving", "inverse_pair_0", "inverse_pair_t"] {
        assert!(b.residuals.iter().any(|r| r.name == name && r.passed), "{name}");
    }
}

#[test]
fn non_convergence_emits_bundle_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let k = data("kernel3.json");
    let (code, path) = solve(
        dir.path(),
        "nc.json",
        &["classical-sinkhorn", "--kernel", path_str(&k), "--max-iter", "3", "--tol", "1e-15"],
    );
    assert_eq!(code, 2);
    let b = Bundle::read(&path).unwrap();
    assert_eq!(b.status, Status::NotConverged);
    assert_eq!(b.report.residual_trace.len(), 3);
    assert!(b.solution.is_none());
    let o = bridgekit(&["verify", path_str(&path)]);
    assert_eq!(o.status.code(), Some(1), "nothing to verify without a solution");
}

#[test]
fn output_is_deterministic_and_reserializes_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = quantum_bridge_args();
    args.extend(["--seed".into(), "7".into()]);
    let (_, a) = solve(dir.path(), "a.json", &as_strs(&args));
    let (_, b) = solve(dir.path(), "b.json", &as_strs(&args));
    let text_a = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text_a, std::fs::read_to_string(&b).unwrap());
    let parsed = Bundle::read(&a).unwrap();
    assert_eq!(parsed.to_json(), text_a);
    assert_eq!(parsed.precision, 17);
}

#[test]
fn summary_has_plottable_trace_block() {
    let k = data("kernel3.json");
    let o = bridgekit(&["classical-sinkhorn", "--kernel", path_str(&k)]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let block: Vec<&str> = text.lines().skip_while(|l| *l != "# iteration residual").skip(1).collect();
    assert!(!block.is_empty());
    for (i, line) in block.iter().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols.len(), 2);
        assert_eq!(cols[0].parse::<usize>().unwrap(), i + 1);
        assert!(cols[1].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn log_levels_are_controlled_by_environment() {
    let k = data("kernel3.json");
    let run = |level: &str| {
        Command::new(env!("CARGO_BIN_EXE_bridgekit"))
            .args(["classical-sinkhorn", "--kernel", path_str(&k)])
            .env("BRIDGEKIT_LOG", level)
            .output()
            .unwrap()
    };
    assert!(String::from_utf8_lossy(&run("trace").stderr).contains("classical iteration 1"));
    assert!(run("quiet").stderr.is_empty());
    assert!(String::from_utf8_lossy(&run("info").stderr).contains("converged"));
}
