//! Admissible weight factors: closed-form regularity indices and the
//! empirical membership check on a grid.
//!
//! Run with `cargo run --example class_s_weights`.

use besov::weights::{verify_class_s, ProductWeight, WeightFactor};

fn main() -> besov::Result<()> {
    let factors = [
        ("t^0.5", WeightFactor::power(0.5)?),
        ("t^2", WeightFactor::power(2.0)?),
        ("t^1.5 * (c - ln t)^2", WeightFactor::power_log(1.5, 2.0, 1.0)?),
    ];

    println!("{:<22} {:>8} {:>8}  verdict", "factor", "lower", "upper");
    for (name, w) in &factors {
        let (lo, hi) = w.regularity_indices()?;
        let report = verify_class_s(w, 0.5, 64)?;
        println!(
            "{:<22} {:>8.3} {:>8.3}  {:?}",
            name, lo, hi, report.verdict
        );
        for key in ["min_ratio", "max_ratio", "alpha_emp", "beta_emp"] {
            if let Some(v) = report.metric(key) {
                println!("    {key} = {v:.6}");
            }
        }
    }

    // Product weights act factorwise; the indices stack into vectors.
    let w2 = ProductWeight::new(vec![
        WeightFactor::power(0.5)?,
        WeightFactor::power_log(1.0, -1.0, 2.0)?,
    ])?;
    println!("\nbidisc weight, per-factor lower indices: {:?}", w2.alpha_vec()?);
    println!("value at t = (0.25, 0.05): {:.6}", w2.eval(&[0.25, 0.05])?);
    Ok(())
}
