use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anisohardy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("anisohardy-cli-{}-{}", name, std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn dilation_info_isotropic() {
    let o = run(&["dilation-info", "--matrix", "2,0;0,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["b"].as_f64(), Some(4.0));
    assert_eq!(v["n"].as_u64(), Some(2));
}

#[test]
fn dilation_info_rejects_shear() {
    let o = run(&["dilation-info", "--matrix", "1,1;0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotExpansive"));
}

#[test]
fn dilation_info_diagonal_spectrum() {
    let v = json(&run(&["dilation-info", "--matrix", "2,0;0,3"]));
    assert_eq!(v["b"].as_f64(), Some(6.0));
    assert!((v["lambda_minus"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["lambda_plus"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn rho_eval_examples() {
    for (point, expected) in [("0.75", "rho=1 k=0"), ("0", "rho=0"), ("1.5", "rho=2 k=1")] {
        let o = run(&["rho-eval", "--matrix", "2", "--point", point]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), expected);
    }
}

#[test]
fn rho_eval_out_of_range() {
    let o = run(&["rho-eval", "--matrix", "2", "--point", "1e300"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("OutOfRange"));
}

#[test]
fn ft_bound_passes() {
    let o = run(&["verify", "ft-bound", "--matrix", "2", "--space", "lebesgue:p=0.666", "--seeds", "1..10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["C_hat"].as_f64().unwrap().is_finite());
    assert!(v["shell_at_sup"].is_i64());
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn coeff_bound_passes() {
    let o = run(&["verify", "coeff-bound", "--space", "lebesgue:p=0.75", "--atoms", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["ratio"].as_f64().unwrap() <= 1.0 + 1e-8);
}

#[test]
fn origin_decay_faster_with_more_moments() {
    let rate = |d: &str| {
        let o = run(&["verify", "origin-decay", "--space", "lebesgue:p=0.666", "--d", d, "--seeds", "1..3"]);
        assert_eq!(o.status.code(), Some(0));
        json(&o)["fitted_rate"].as_f64().unwrap()
    };
    assert!(rate("1") >= rate("0"));
}

#[test]
fn origin_decay_violation_exits_one() {
    let o = run(&["verify", "origin-decay", "--space", "lebesgue:p=0.5", "--d", "0", "--seeds", "1..2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], Value::Bool(false));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "no-such-check"]).status.code(), Some(2));
    assert_eq!(run(&["rho-eval", "--matrix", "2"]).status.code(), Some(2));
    let o = run(&["verify", "ft-bound", "--space", "lebesgue:p=0.75", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("InvalidParameter"));
}

#[test]
fn outputs_are_deterministic() {
    let mut csvs = Vec::new();
    for run_id in 0..2 {
        let dir = scratch(&format!("det{}", run_id));
        let o = run(&[
            "verify", "ft-bound", "--matrix", "2,0;0,3", "--space", "lebesgue:p=0.75", "--seeds", "1..2", "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let csv = fs::read(dir.join("ft-bound.csv")).unwrap();
        assert!(csv.starts_with(b"shell_m,rho_star,metric\n"));
        csvs.push((csv, fs::read(dir.join("ft-bound.json")).unwrap()));
        fs::remove_dir_all(dir).unwrap();
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("cfg");
    let path = dir.join("run.cfg");
    fs::write(&path, "# experiment\nmatrix = 2,0;0,3\nspace = lebesgue:p=0.75\n").unwrap();
    let v = json(&run(&["dilation-info", "--config", path.to_str().unwrap()]));
    assert_eq!(v["b"].as_f64(), Some(6.0));
    let v = json(&run(&["dilation-info", "--config", path.to_str().unwrap(), "--matrix", "3"]));
    assert_eq!(v["b"].as_f64(), Some(3.0));

    fs::write(&path, "matrix = 2\nunknown = 1\n").unwrap();
    let o = run(&["dilation-info", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn atom_round_trip_through_files() {
    let dir = scratch("atom");
    let o = run(&["atom", "make", "--seeds", "3", "--k", "-1", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = json(&o);
    assert_eq!(manifest["k"].as_i64(), Some(-1));
    assert_eq!(manifest["space_descriptor"], "lebesgue:p=0.75");

    let atom = dir.join("atom.csv");
    let ok = run(&["atom", "validate", "--input", atom.to_str().unwrap(), "--k", "-1"]);
    assert_eq!(ok.status.code(), Some(0));
    let leaked = run(&["atom", "validate", "--input", atom.to_str().unwrap(), "--k", "-2"]);
    assert_eq!(leaked.status.code(), Some(1));

    let norm = run(&["space", "norm", "--input", atom.to_str().unwrap(), "--space", "lebesgue:p=2", "--json"]);
    assert_eq!(norm.status.code(), Some(0));
    assert!(json(&norm)["norm"].as_f64().unwrap() > 0.0);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn lower_bound_verdicts() {
    let o = run(&["verify", "space-lower-bound", "--space", "lorentz:p=0.5,q=0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["min_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let o = run(&["space", "indicator", "--space", "lebesgue:p=0.5", "--k", "3", "--json"]);
    assert!((json(&o)["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn fs_probe_and_derivative_decay_pass() {
    let o = run(&["verify", "fs-probe", "--space", "lebesgue:p=0.75", "--seeds", "1..4"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "derivative-decay", "--d", "1", "--seeds", "1..2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn hl_integral_converges() {
    let o = run(&["verify", "hl-integral", "--space", "lebesgue:p=0.666", "--seeds", "1..2", "--atoms", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["d"].as_u64(), Some(1));
    assert!(v["max_tail_increment"].as_f64().unwrap() <= 0.01);
}
