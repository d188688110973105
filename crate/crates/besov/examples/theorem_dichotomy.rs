//! One full dichotomy run: the same operator-target harness the CLI exposes,
//! on parameters where the index condition holds (stabilizing ratios) and
//! where it fails (detected divergence).
//!
//! Run with `cargo run --release --example theorem_dichotomy`
//! (a couple of minutes of cubature; release mode recommended).

use besov::config::ExperimentConfig;
use besov::verify::{run_target, Target};

fn main() -> besov::Result<()> {
    // Index condition satisfied: alpha = 0 over threshold a_w/p - 2 = -1.
    let satisfied: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "p": 0.5,
        "weight": {"family": "power", "a": 0.5},
        "alpha": 0.0,
        "r_sweep": [0.5, 0.7, 0.9],
        "quadrature": {
            "radial_nodes": 32, "angular_nodes": 96,
            "max_refinement": 1, "target_rel_tol": 1e-4
        },
        "seed": 11
    }))
    .map_err(besov::Error::from)?;

    let rep = run_target(Target::T1, None, &satisfied)?;
    println!("T1 with the index condition satisfied -> {:?} ({})", rep.verdict, rep.mode);
    for key in ["sup_ratio", "stabilization_ratio", "probes_used"] {
        if let Some(v) = rep.metric(key) {
            println!("  {key} = {v:.4}");
        }
    }

    // Index condition violated: weight t^2 pushes the threshold to 2 > 0.
    let violated: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "p": 0.5,
        "weight": {"family": "power", "a": 2.0},
        "alpha": 0.0,
        "r_sweep": [0.5, 0.7, 0.9, 0.95],
        "quadrature": {
            "radial_nodes": 32, "angular_nodes": 96,
            "max_refinement": 1, "target_rel_tol": 1e-4
        },
        "seed": 11
    }))
    .map_err(besov::Error::from)?;

    let rep = run_target(Target::T1, None, &violated)?;
    println!("\nT1 with the index condition violated -> {:?} ({})", rep.verdict, rep.mode);
    for key in ["growth_slope", "spearman_rho", "predictor_last"] {
        if let Some(v) = rep.metric(key) {
            println!("  {key} = {v:.4}");
        }
    }
    println!("\nrule: {}", rep.rule);
    Ok(())
}
