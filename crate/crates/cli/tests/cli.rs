use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_geoprod");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("GEOPROD_TOL").output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_passes_on_catalog_examples() {
    for spec in ["so3.json", "so4.json", "so4_so2.json"] {
        let out = run(&["verify", path_str(&data(spec))]);
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert_eq!(out.status.code(), Some(0), "{spec}\n{stdout}");
        assert!(stdout.ends_with("overall: PASS\n"));
    }
}

#[test]
fn verify_zero_lambda_is_input_error() {
    let out = run(&["verify", path_str(&data("zero_lambda.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("degenerate metric"), "{err}");
}

#[test]
fn verify_bad_chain_is_input_error() {
    let out = run(&["verify", path_str(&data("bad_chain.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("increase strictly"), "{err}");
}

#[test]
fn malformed_spec_reports_position() {
    let out = run(&["verify", path_str(&data("malformed.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3, column 13"), "{err}");
}

#[test]
fn missing_spec_is_input_error() {
    let out = run(&["verify", path_str(&data("does_not_exist.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_override_can_fail_checks() {
    let out =
        Command::new(BIN).args(["verify", path_str(&data("so3.json"))]).env("GEOPROD_TOL", "1e-300").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out =
        Command::new(BIN).args(["verify", path_str(&data("so3.json"))]).env("GEOPROD_TOL", "loose").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["verify", path_str(&data("so4.json")), "--report", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], serde_json::Value::Bool(true));
    assert_eq!(json["checks"].as_array().unwrap().len(), 11);
    let out = run(&["verify", path_str(&data("so4.json")), "--format", "json"]);
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, json);
}

fn golden_case(spec: &str, args: &[&str], golden: &str) {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let mut full = vec!["geodesic".to_string(), path_str(&data(spec)).to_owned()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(path_str(&csv).to_owned());
    let full: Vec<&str> = full.iter().map(String::as_str).collect();
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = fs::read(data(&format!("golden/{golden}.csv"))).unwrap();
    assert_eq!(fs::read(&csv).unwrap(), expected, "{golden}.csv differs");
    let expected = fs::read(data(&format!("golden/{golden}.generators.json"))).unwrap();
    assert_eq!(fs::read(dir.path().join("out.generators.json")).unwrap(), expected);
}

#[test]
fn geodesic_csv_matches_golden_files() {
    golden_case("so3.json", &["--velocity=0.6,-0.48,0.64", "--t-max", "2", "--samples", "5"], "so3_geodesic");
    golden_case("so4.json", &["--t-max", "1", "--samples", "4"], "so4_geodesic");
    golden_case(
        "so4_so2.json",
        &["--velocity=0.1,-0.2,0.3,-0.4,0.5", "--t-max", "-1.5", "--samples", "4"],
        "so4_so2_geodesic",
    );
}

#[test]
fn geodesic_csv_is_byte_identical_across_runs() {
    let spec = data("so4.json");
    let args = ["geodesic", path_str(&spec), "--t-max", "5", "--samples", "51", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn geodesic_rejects_wrong_velocity_length() {
    let out = run(&["geodesic", path_str(&data("so3.json")), "--velocity=1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dim m = 3"));
}

#[test]
fn compare_passes_and_fails_by_deviation() {
    let out = run(&["compare", path_str(&data("so4.json"))]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("max_deviation:"));
    // A coarse step still satisfies the guard but misses the 1e-5 limit.
    let out =
        run(&["compare", path_str(&data("so4.json")), "--velocity=3,1,2,-1,2,1", "--step", "0.02", "--t-max", "4"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn compare_stability_guard_is_input_error() {
    let out = run(&["compare", path_str(&data("so3.json")), "--velocity=10,0,0", "--step", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("stability"));
}

#[test]
fn bench_reports_timings() {
    let out = run(&["bench", path_str(&data("so4.json")), "--samples", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("closed_form_time_s:") && stdout.contains("rk4_time_s:"));
}

#[test]
fn catalog_lists_examples_that_parse() {
    let out = run(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let specs: Vec<&str> = stdout.lines().map(str::trim).filter(|l| l.starts_with("{\"group\"")).collect();
    assert_eq!(specs.len(), 3);
    for s in specs {
        geoprod_cli::SpaceSpec::parse(s).unwrap().build().unwrap();
    }
}
