//! End-to-end runs of the command-line tool.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use erlang_tails::commands::ClassReport;
use erlang_tails::fixtures::example_matrix;
use erlang_tails::io::{format_matrix, ExplicitPencilSpec, ModelSpec, ReportBody, ReportFile};
use erlang_tails::models::DiscreteModel;
use erlang_tails::simulator::read_sample_file;
use erlang_tails::transforms::Distribution;
use tempfile::TempDir;

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erlang-tails")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn analyze(spec: &Path) -> (i32, ReportFile) {
    let o = tool(&["analyze", s(spec)]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let report: ReportFile = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (code(&o), report)
}

fn explicit(coefficients: Vec<Vec<Vec<f64>>>, root: f64) -> String {
    common::spec_json(ModelSpec::ExplicitPencil(ExplicitPencilSpec { coefficients, root, v: None, w: None }))
}

#[test]
fn validate_accepts_a_valid_model() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "reed.json", &common::spec_json(ModelSpec::Continuous(common::reed())));
    let o = tool(&["validate", s(&spec)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn validate_names_the_failed_condition() {
    let dir = TempDir::new().unwrap();
    let m = DiscreteModel {
        pi: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        upsilon: vec![vec![1.0; 2]; 2],
        initial_law: vec![1.0, 0.0],
        increments: vec![vec![Distribution::Gaussian { mean: 0.0, variance: 1.0 }; 2]; 2],
    };
    let spec = write(&dir, "d.json", &common::spec_json(ModelSpec::Discrete(m)));
    let report = dir.path().join("v.json");
    let o = tool(&["validate", s(&spec), "--out", s(&report)]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("FAIL (v)")), "{stdout}");
    match ReportFile::read(&report).unwrap().report {
        ReportBody::Validation(v) => assert!(!v.clause("(v)").unwrap().passed),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "bad.json", "{\"format_version\": 1, \"model\": {\"type\": \"continuous\"");
    let o = tool(&["validate", s(&spec)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = tool(&["analyze", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 2);
    let future = write(&dir, "v2.json", &common::spec_json(ModelSpec::Continuous(common::reed())).replace("\"format_version\": 1", "\"format_version\": 2"));
    assert_eq!(code(&tool(&["analyze", s(&future)])), 2);
}

#[test]
fn analyze_reports_rates_and_orders() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "chain.json", &common::spec_json(ModelSpec::Continuous(common::chain(1.0).to_model().unwrap())));
    let (c, r) = analyze(&spec);
    assert_eq!(c, 0);
    let ReportBody::Tail(t) = r.report else { panic!() };
    assert!((t.upper.alpha.unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(t.upper.d_alpha, Some(2));

    let spec = write(&dir, "reed.json", &common::spec_json(ModelSpec::Continuous(common::reed())));
    let (c, r) = analyze(&spec);
    assert_eq!(c, 0);
    let ReportBody::Tail(t) = r.report else { panic!() };
    assert!((t.upper.alpha.unwrap() - 1.0).abs() < 1e-9);
    assert!((t.lower.beta.unwrap() - 1.0).abs() < 1e-9);
    assert_eq!((t.upper.d_alpha, t.lower.d_beta), (Some(1), Some(1)));
}

#[test]
fn analyze_explicit_pencils() {
    let dir = TempDir::new().unwrap();
    let c0 = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]];
    let c1 = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let c2 = vec![vec![0.0, 0.0, 1.0], vec![0.0; 3], vec![0.0; 3]];
    let spec = write(&dir, "jordan.json", &explicit(vec![c0, c1, c2], 0.0));
    let (_, r) = analyze(&spec);
    let ReportBody::Pole(p) = r.report else { panic!() };
    assert_eq!(p.d, 3);

    let a = example_matrix();
    let n = a.nrows();
    let rows = |f: &dyn Fn(usize, usize) -> f64| (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
    let shifted = explicit(vec![rows(&|i, j| a[(i, j)]), rows(&|i, j| if i == j { -1.0 } else { 0.0 })], 3.0);
    let spec = write(&dir, "example.json", &shifted);
    let (c, r) = analyze(&spec);
    let ReportBody::Pole(p) = r.report else { panic!() };
    assert_eq!(c, 0, "{p:?}");
    assert_eq!(p.d, 2);
    assert!(p.summary.basic.iter().any(|&b| b));
}

#[test]
fn report_written_with_out_reads_back() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "chain.json", &common::spec_json(ModelSpec::Continuous(common::chain(3.0).to_model().unwrap())));
    let out = dir.path().join("r.json");
    let o = tool(&["analyze", s(&spec), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("alpha="));
    let r = ReportFile::read(&out).unwrap();
    let (_, again) = analyze(&spec);
    assert_eq!(r, again);
    assert_eq!(r.input_digest.len(), 64);
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "m.json", &common::spec_json(ModelSpec::Discrete(common::discrete_irreducible())));
    let run = |prefix: &str, workers: &str| {
        let p = dir.path().join(prefix);
        let o = tool(&["simulate", s(&spec), "--paths", "20000", "--seed", "5", "--workers", workers, "--out", s(&p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        p
    };
    let a = run("a", "1");
    let b = run("b", "3");
    let bytes = |p: &Path, ext: &str| std::fs::read(format!("{}{ext}", p.display())).unwrap();
    for ext in [".bin", ".meta.json", ".survival.csv"] {
        assert_eq!(bytes(&a, ext), bytes(&b, ext), "{ext}");
    }
    let values = read_sample_file(Path::new(&format!("{}.bin", a.display()))).unwrap();
    assert_eq!(values.len(), 20000);
    let csv = String::from_utf8(bytes(&a, ".survival.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("w,S(w),count"));
    let meta: serde_json::Value = serde_json::from_slice(&bytes(&a, ".meta.json")).unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["n_paths"], 20000);
}

#[test]
fn fuzz_passes_and_loose_tolerance_is_caught() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("fuzz.csv");
    let o = tool(&["rothblum-fuzz", "--instances", "500", "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("instance,seed,N,index,chain_length,agree"));
    assert_eq!(text.lines().count(), 501);

    let loose = dir.path().join("loose.csv");
    let o = tool(&["rothblum-fuzz", "--instances", "500", "--tol-rank", "0.1", "--out", s(&loose)]);
    assert_eq!(code(&o), 1);
    let dumps = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("loose.csv.instance-"))
        .count();
    assert!(dumps > 0);
}

#[test]
fn classes_of_a_matrix_file() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "a.txt", &format!("# example\n{}", format_matrix(&example_matrix())));
    let o = tool(&["classes", s(&m)]);
    assert_eq!(code(&o), 0);
    let r: ClassReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.longest_chain_length, 2);
    assert!(r.block_triangular);
    let bad = write(&dir, "b.txt", "1 2\n3\n");
    assert_eq!(code(&tool(&["classes", s(&bad)])), 2);
}
