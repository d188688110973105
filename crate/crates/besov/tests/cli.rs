//! End-to-end tests of the command-line binary: the exit-code contract
//! (0 pass, 1 failed verdict, 2 invalid input, 3 non-convergence), output
//! shapes, and cheap closed-form oracles through the full stack.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use besov::partition::covered_area_closed_form;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_besov"))
}

fn write_config(dir: &Path, name: &str, v: serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(&v).unwrap()).unwrap();
    p
}

fn base_config() -> serde_json::Value {
    serde_json::json!({
        "p": 2.0,
        "weight": {"family": "power", "a": 0.5},
        "quadrature": {
            "radial_nodes": 24, "angular_nodes": 64,
            "max_refinement": 1, "target_rel_tol": 1e-6
        }
    })
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

#[test]
fn partition_csv_lists_every_cell() {
    let out = bin()
        .args(["partition", "--n", "1", "--max-level", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,measure,level_0,index_0,center_re_0,center_im_0"
    );
    // levels 0..=3 hold 2 + 4 + 8 + 16 sectors
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    let total: f64 = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    let exact = covered_area_closed_form(3);
    assert!((total - exact).abs() <= 1e-12 * exact);
}

#[test]
fn verify_partition_check_writes_csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["partition"] = serde_json::json!({"max_level": 4, "samples_per_cell": 8});
    let cfg = write_config(dir.path(), "p1.json", v);
    let report = dir.path().join("report.csv");
    let out = bin()
        .args(["--threads", "1", "verify", "--target", "P1", "--format", "csv"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "target,mode,coordinate,metric,value,est_error"
    );
    assert!(text.contains("covering_multiplicity"));
    assert!(lines.all(|l| l.starts_with("P1,")));
}

#[test]
fn verify_report_json_parses_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p1.json", base_config());
    let out = bin()
        .args(["verify", "--target", "P1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!(v.get("verdict").is_some());
    assert!(v.get("metrics").is_some());
    assert!(v.get("repro").is_some());
}

#[test]
fn failed_verdict_exits_one() {
    // Kernel-moment gap barely above the weight index: the profile is
    // bounded in the limit but overshoots the constant-factor rule on the
    // sampled range, so the check must report a failed verdict.
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["lemma2"] = serde_json::json!({"a": 1.0, "b": 3.55});
    v["quadrature"] = serde_json::json!({
        "radial_nodes": 48, "angular_nodes": 128,
        "max_refinement": 1, "target_rel_tol": 1e-5
    });
    let cfg = write_config(dir.path(), "marginal.json", v);
    let out = bin()
        .args(["verify", "--target", "L2", "--format", "csv", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict_pass,0"));

    // Forcing an operator target into a mode whose hypothesis precondition
    // does not hold is an input error, not a verdict.
    let stable = write_config(
        dir.path(),
        "stable.json",
        serde_json::json!({
            "p": 1.0,
            "weight": {"family": "power", "a": 0.5},
            "alpha": 1.0
        }),
    );
    let out = bin()
        .args(["verify", "--target", "T6", "--mode", "necessity", "--config"])
        .arg(&stable)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    let out = bin()
        .args(["verify", "--target", "P1", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let cfg = write_config(dir.path(), "ok.json", base_config());
    let out = bin()
        .args(["verify", "--target", "T9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let mut bad = base_config();
    bad["nope"] = 1.into();
    let badcfg = write_config(dir.path(), "bad.json", bad);
    let out = bin()
        .args(["verify", "--target", "P1", "--config"])
        .arg(&badcfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bin()
        .args(["norm", "--monomial", "1", "--extremal-r", "0.5", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn berezin_fixes_constants_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", base_config());
    let out = bin()
        .args(["berezin", "--point", "0.3,0.1", "--point", "-0.2,0.4", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let evals = v["evaluations"].as_array().unwrap();
    assert_eq!(evals.len(), 2);
    for e in evals {
        assert!((e["value_re"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
        assert!(e["value_im"].as_f64().unwrap().abs() <= 1e-6);
    }
}

#[test]
fn hankel_conjugate_symbol_matches_closed_form() {
    // With unit input and symbol conj(zeta)^2 at alpha = 0 the operator
    // returns pi * conj(z)^2.
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["symbol"] = serde_json::json!({"kind": "conj-monomial", "degree": [2]});
    let cfg = write_config(dir.path(), "h.json", v);
    let out = bin()
        .args(["hankel", "--point", "0.5,0.2", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let e = &v["evaluations"][0];
    let z = besov::C64::new(0.5, 0.2);
    let oracle = z.conj().powu(2) * std::f64::consts::PI;
    assert!((e["value_re"].as_f64().unwrap() - oracle.re).abs() <= 1e-8);
    assert!((e["value_im"].as_f64().unwrap() - oracle.im).abs() <= 1e-8);
}

#[test]
fn integrate_reproduces_kernel_mass() {
    // At b = alpha + 2 the holomorphic kernel integral is pi/(alpha+1)
    // independent of the base point.
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["alpha"] = 1.0.into();
    v["quadrature"]["max_refinement"] = 3.into();
    let cfg = write_config(dir.path(), "i.json", v);
    let out = bin()
        .args(["integrate", "--z", "0.5,0.0", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["converged"].as_bool().unwrap());
    let exact = std::f64::consts::PI / 2.0;
    assert!((v["value_re"].as_f64().unwrap() - exact).abs() <= 1e-6 * exact);
}

#[test]
fn unreachable_tolerance_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["quadrature"] = serde_json::json!({
        "radial_nodes": 8, "angular_nodes": 16,
        "max_refinement": 1, "target_rel_tol": 1e-16
    });
    let cfg = write_config(dir.path(), "nc.json", v);
    let out = bin()
        .args(["integrate", "--z", "0.9,0.0", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    assert!(!v["converged"].as_bool().unwrap());
}

#[test]
fn norm_reports_closed_form_and_embeds_domain_errors() {
    // p = 2 with unit weight: derivative norm of z is sqrt(2 pi); the
    // integral norm needs a steeper weight and must surface that as an
    // embedded error, not a crash.
    let dir = tempfile::tempdir().unwrap();
    let mut v = base_config();
    v["weight"] = serde_json::json!({"family": "power", "a": 0.0});
    let cfg = write_config(dir.path(), "n.json", v);
    let out = bin()
        .args(["norm", "--monomial", "1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let norms = v["norms"].as_array().unwrap();
    assert_eq!(norms[0]["kind"], "derivative");
    let dev = norms[0]["value"].as_f64().unwrap() - (2.0 * std::f64::consts::PI).sqrt();
    assert!(dev.abs() <= 1e-9);
    assert_eq!(norms[1]["kind"], "integral");
    assert!(norms[1].get("error").is_some());
}

#[test]
fn extremal_norm_probe_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", base_config());
    let out = bin()
        .args(["norm", "--extremal-r", "0.9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let d = v["norms"][0]["value"].as_f64().unwrap();
    assert!(d.is_finite() && d > 0.0);
}

#[test]
fn sections_emit_dense_finite_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", base_config());
    let matrix = dir.path().join("sec.csv");
    let out = bin()
        .args(["sections", "--g-degree", "1", "--in-bound", "2", "--out-bound", "2"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&matrix)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&matrix).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "row,col,row_index,col_index,re,im");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert!(cells[4].parse::<f64>().unwrap().is_finite());
        assert!(cells[5].parse::<f64>().unwrap().is_finite());
    }
}
