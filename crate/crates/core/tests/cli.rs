use std::path::Path;
use std::process::{Command, Output};

use phasecert::io::read_field;
use phasecert::moments::moment_report;
use serde_json::Value;

fn phasecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecert")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn bundle(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("bundle JSON")
}

fn cert<'a>(b: &'a Value, name: &str) -> &'a Value {
    b["certificates"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn final1_fails_refined_but_passes_rsup() {
    let o = phasecert(&["certify", "--state", "example_final1"]);
    assert_eq!(code(&o), 1);
    let b = bundle(&o);
    assert_eq!(cert(&b, "rsup")["verdict"], "pass");
    assert_eq!(cert(&b, "refined_rsup_ineq1")["verdict"], "fail");
    assert_eq!(cert(&b, "refined_rsup_cor1b")["verdict"], "fail");
    assert_eq!(b["outcome"], "fail");
}

#[test]
fn ground_state_passes_with_all_equalities() {
    let o = phasecert(&["certify", "--state", "gaussian_pure"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let b = bundle(&o);
    for c in b["certificates"].as_array().unwrap() {
        assert_eq!(c["verdict"], "pass", "{}", c["name"]);
        for e in c["equalities"].as_array().unwrap() {
            assert_eq!(e["holds"], true, "{} {}", c["name"], e["name"]);
        }
    }
    for key in ["config", "grid", "version", "warnings", "moments", "entropies", "refined_rsup"] {
        assert!(!b[key].is_null(), "{key}");
    }
    assert!(b["grid"]["axes"][0]["reciprocal_half_extent"].as_f64().unwrap() > 0.0);
    assert_eq!(b["config"]["half_extent"].as_f64().unwrap(), 6.0);
}

#[test]
fn final2_probe_fails_despite_refined_pass() {
    let o = phasecert(&[
        "certify",
        "--state",
        "example_final2",
        "--certs",
        "refined_rsup_ineq1,refined_rsup_ineq2,positivity_probe",
    ]);
    assert_eq!(code(&o), 1);
    let b = bundle(&o);
    assert_eq!(cert(&b, "refined_rsup_ineq1")["verdict"], "pass");
    assert_eq!(cert(&b, "refined_rsup_ineq2")["verdict"], "pass");
    assert_eq!(cert(&b, "positivity_probe")["verdict"], "fail");
}

#[test]
fn leaking_grid_is_indeterminate() {
    let o = phasecert(&["certify", "--state", "gaussian_pure", "--half-extent", "3.3", "--certs", "refined_rsup_ineq2"]);
    assert_eq!(code(&o), 2);
    let b = bundle(&o);
    let c = cert(&b, "refined_rsup_ineq2");
    assert_eq!(c["verdict"], "indeterminate");
    assert!(!c["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn errors_exit_three() {
    assert_eq!(code(&phasecert(&["certify", "--state", "no_such_kind"])), 3);
    assert_eq!(code(&phasecert(&["certify", "--state", "gaussian_pure", "--tol", "bogus=1"])), 3);
    assert_eq!(code(&phasecert(&["certify", "--state", "gaussian_pure", "--hbar=-1"])), 3);
    assert_eq!(code(&phasecert(&["certify", "--no-such-flag"])), 3);
    assert_eq!(code(&phasecert(&["sweep", "--state", "gaussian_pure", "--param", "radius", "--from", "1", "--to", "2"])), 3);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.json", "b.json"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        // h1 is not minimal-uncertainty, so saturation fails and the exit code is 1
        let o = phasecert(&["certify", "--state", "hermite:k=1", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 1);
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn csv_bundle() {
    let o = phasecert(&["certify", "--state", "example_final1", "--certs", "heisenberg", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("certificate,verdict,margin,value"));
    assert!(lines.next().unwrap().starts_with("heisenberg,pass,dx1_dp1_minus_half_hbar,"));
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn weight_sweep_purity_column() {
    let state = r#"{"kind":"mixture","weights":[0.5,0.5],"children":[{"kind":"hermite","k":0},{"kind":"hermite","k":1}]}"#;
    let o = phasecert(&["sweep", "--state", state, "--param", "weight", "--from", "0", "--to", "1", "--steps", "6", "--certs", "rsup"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let w: Vec<f64> = csv_column(&text, "weight").iter().map(|s| s.parse().unwrap()).collect();
    let p: Vec<f64> = csv_column(&text, "purity").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(w.len(), 6);
    for (w, p) in w.iter().zip(&p) {
        assert!((p - (w * w + (1.0 - w) * (1.0 - w))).abs() < 1e-8);
    }
}

#[test]
fn mu_sweep_finds_dilation_threshold() {
    // disc R = 1 has λ_σ = 1/4, so F_μ satisfies RSUP for μ ≤ √(2·¼/ħ) = 1/√2
    let o = phasecert(&[
        "sweep", "--state", "disc_indicator:radius=1", "--param", "mu", "--from", "0.5", "--to", "1.0", "--steps", "11",
        "--certs", "rsup",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mu: Vec<f64> = csv_column(&text, "mu").iter().map(|s| s.parse().unwrap()).collect();
    let v = csv_column(&text, "rsup.verdict");
    let last_pass = mu.iter().zip(&v).filter(|(_, v)| *v == "pass").map(|(m, _)| *m).fold(0.0, f64::max);
    let first_fail = mu.iter().zip(&v).filter(|(_, v)| *v == "fail").map(|(m, _)| *m).fold(f64::INFINITY, f64::min);
    assert!(last_pass < first_fail);
    assert!((0.65..=0.75).contains(&last_pass) && (0.7..=0.8).contains(&first_fail), "{last_pass} {first_fail}");
}

#[test]
fn disc_radius_sweep_crosses_at_sqrt_two() {
    let o = phasecert(&[
        "sweep", "--state", "disc_indicator:radius=1", "--param", "radius", "--from", "1", "--to", "2", "--steps", "21",
        "--certs", "rsup",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let r: Vec<f64> = csv_column(&text, "radius").iter().map(|s| s.parse().unwrap()).collect();
    let v = csv_column(&text, "rsup.verdict");
    let first_pass = r.iter().zip(&v).find(|(_, v)| *v == "pass").map(|(r, _)| *r).unwrap();
    assert!((first_pass - 1.45).abs() < 1e-9, "{first_pass}");
}

fn transform(state: &str, which: &str, out: &Path, extra: &[&str]) {
    let mut args = vec!["transform", "--state", state, "--which", which, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = phasecert(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn transforms_round_trip_and_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);

    transform("hermite:k=0", "wigner", &d("w0.csv"), &["--format", "csv"]);
    let w0 = read_field(&d("w0.csv")).unwrap();
    let mut worst: f64 = 0.0;
    w0.grid().for_each_point(|i, z| {
        let exact = (-(z[0] * z[0] + z[1] * z[1])).exp() / std::f64::consts::PI;
        worst = worst.max((w0.values()[i].re - exact).abs());
    });
    // truncation at the default half extent costs about 1e-9
    assert!(worst < 1e-8, "{worst}");

    transform(d("w0.csv").to_str().unwrap(), "density", &d("rho.psf"), &[]);
    let rho = moment_report(&read_field(&d("rho.psf")).unwrap()).unwrap();
    assert!((rho.covariance[(0, 0)] - 0.25).abs() < 1e-8 && (rho.covariance[(1, 1)] - 0.25).abs() < 1e-8);

    let l = (std::f64::consts::PI * 256.0 / 2.0).sqrt().to_string();
    transform("example_final2", "sft", &d("f2s.psf"), &["--half-extent", &l]);
    let once = read_field(&d("f2s.psf")).unwrap();
    transform(d("f2s.psf").to_str().unwrap(), "sft", &d("f2ss.psf"), &[]);
    let twice = read_field(&d("f2ss.psf")).unwrap();
    // F_σF = −F for this field, and F_σ is an involution
    let sum = once.zip_with(&twice, |a, b| a + b).unwrap();
    assert!(sum.max_abs() < 1e-3);
    assert_eq!(twice.grid(), once.grid());
}

#[test]
fn selftest_single_criterion() {
    let o = phasecert(&["selftest", "--criterion", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS 2.cor1b_margin"));
}
