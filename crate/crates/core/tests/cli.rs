//! Exit codes and output files of the `codazzi` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codazzi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn verify_sphere_passes() {
    let out = run(&["verify", "--surface", "sphere", "--grid", "64x64"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert!(checks.iter().any(|c| c["name"] == "codazzi_residual"));
    assert_eq!(r["meta"]["grid"], serde_json::json!([64, 64]));
}

#[test]
fn verify_catenoid_cauchy_riemann_below_1e_6() {
    let out = run(&["verify", "--surface", "catenoid"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let cr = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "cr_residual")
        .expect("catenoid chart is isothermal");
    assert!(cr["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn unattainable_tolerance_exits_with_2() {
    let out = run(&[
        "verify",
        "--surface",
        "catenoid",
        "--grid",
        "32x32",
        "--tol",
        "*=1e-30",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == false));
}

#[test]
fn non_elliptic_profile_exits_with_1() {
    let out = run(&[
        "transform",
        "--surface",
        "cylinder",
        "--profile",
        "sqrt",
        "--grid",
        "16x16",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ellipticity"));
}

#[test]
fn usage_errors_exit_with_1() {
    assert_eq!(
        run(&["verify", "--surface", "klein_bottle"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["verify", "--grid", "12"]).status.code(), Some(1));
    assert_eq!(
        run(&["verify", "--tol", "codazzi_residual=-1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["transform", "--surface", "cylinder"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn transform_rotgen_roundtrip() {
    let out = run(&["transform", "--profile", "linear:1,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let rt = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "recovery_roundtrip")
        .unwrap();
    assert!(rt["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn generate_writes_sphere_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "generate",
        "--profile",
        "const:0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["meta"]["values"]["height"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,r,z,theta,kappa1,kappa2,H,K"));
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(last[1].abs() < 1e-6 && (last[2] - 4.0).abs() < 1e-6);
    let saved: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, r);
}

#[test]
fn grove_and_index_on_ellipsoid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&[
        "grove",
        "--surface",
        "ellipsoid_rev",
        "--grid",
        "64x64",
        "--out",
        d,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let header = std::fs::read_to_string(dir.path().join("grove.csv")).unwrap();
    assert!(header.starts_with(
        "u,v,rho,lambda,re_p,im_p,hk_mean_res,hk_extrinsic_res,f1_res_re,f1_res_im\n"
    ));

    let out = run(&["index", "--surface", "ellipsoid_rev"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["meta"]["values"]["foliation_index_k8"], 1.0);
    assert_eq!(r["meta"]["values"]["foliation_index_k20"], 1.0);
}
