//! The coefficient-multiplier derivative on power series: integer and
//! fractional orders, and the pole-type extremal family it feeds.
//!
//! Run with `cargo run --example fractional_derivative`.

use besov::holocalc::{
    extremal_f_r, required_degree, FracOrder, MultiIndex, PolySeries, EXTREMAL_TAIL_REL,
};
use besov::weights::{ProductWeight, WeightFactor};
use besov::C64;

fn main() -> besov::Result<()> {
    // D multiplies the coefficient of z^k by prod (k_j + 1): on 1 + z + z^2
    // the result is 1 + 2z + 3z^2.
    let f = PolySeries::from_terms(
        1,
        MultiIndex::scalar(2),
        &[
            (MultiIndex::scalar(0), C64::new(1.0, 0.0)),
            (MultiIndex::scalar(1), C64::new(1.0, 0.0)),
            (MultiIndex::scalar(2), C64::new(1.0, 0.0)),
        ],
        false,
    )?;
    let df = f.frac_diff(&FracOrder::ones(1))?;
    println!("D(1 + z + z^2) coefficients:");
    for k in 0..=2 {
        println!("  z^{k}: {}", df.coeff(&MultiIndex::scalar(k)).re);
    }

    // Fractional order b = 1/2 multiplies by Gamma(3/2 + k) / (Gamma(3/2) k!).
    let dhalf = f.frac_diff(&FracOrder::new(vec![0.5])?)?;
    println!("\nD^(1/2) coefficients (Gamma ratios):");
    for k in 0..=2 {
        println!("  z^{k}: {:.9}", dhalf.coeff(&MultiIndex::scalar(k)).re);
    }

    // The extremal family: f_r = C_r (1 - r z)^{-k}, normalized through the
    // weight. Truncation demand grows like k log(1/tol) / (1 - r).
    let w = ProductWeight::uniform(WeightFactor::power(0.5)?, 1)?;
    println!("\nextremal family truncation demand (k = 6, tail tol {EXTREMAL_TAIL_REL:.0e}):");
    for r in [0.5, 0.9, 0.99] {
        let deg = required_degree(r, 6, EXTREMAL_TAIL_REL);
        println!("  r = {r:<5} needs degree {deg}");
    }
    let r = 0.7;
    let deg = required_degree(r, 6, EXTREMAL_TAIL_REL);
    let fr = extremal_f_r(&[r], &MultiIndex::scalar(6), &w, 0.5, &MultiIndex::scalar(deg))?;
    let z = [C64::new(0.3, 0.1)];
    println!(
        "  f_0.7 at z = 0.3+0.1i: {:.9} + {:.9}i (series, degree {deg})",
        fr.eval(&z)?.re,
        fr.eval(&z)?.im
    );
    Ok(())
}
