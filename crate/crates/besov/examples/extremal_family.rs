//! The boundary-concentrated extremal probes: norm stability of the
//! normalized family as r -> 1, closed-form evaluation against the series
//! representation, and the divergence predictor they certify.
//!
//! Run with `cargo run --example extremal_family`.

use besov::holocalc::{extremal_f_r, required_degree, MultiIndex, EXTREMAL_TAIL_REL};
use besov::quadrature::QuadratureScheme;
use besov::spaces::{besov_norm, besov_norm_from_df, SpaceParams};
use besov::verify::{default_extremal_k, necessity_predictor, Probe};
use besov::weights::{ProductWeight, WeightFactor};
use besov::C64;

fn main() -> besov::Result<()> {
    let p = 0.5;
    let w = ProductWeight::uniform(WeightFactor::power(0.5)?, 1)?;
    let k = default_extremal_k(&w, p)?;
    println!("weight t^0.5, p = 0.5: smallest admissible pole order k = {:?}", k);

    // The normalization is chosen so the derivative norm stays within a
    // bounded band as the pole approaches the boundary.
    let scheme = QuadratureScheme::new_uniform(1, 96, 384).targeting(1e-8, 3);
    let sp = SpaceParams::new(p, w.clone(), scheme.clone())?;
    println!("\nnorm stability along the sweep:");
    let mut values = Vec::new();
    for r in [0.5, 0.7, 0.9, 0.95] {
        let probe = Probe::extremal(&w, p, &[r], &k)?;
        let n = besov_norm_from_df(|z| probe.eval_df(z).norm(), &sp)?;
        println!("  r = {r:<5} norm = {:.6}", n.value);
        values.push(n.value);
    }
    let band = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / values.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("  max/min = {band:.3}");

    // Closed-form evaluation matches the truncated series.
    let r = 0.7;
    let deg = required_degree(r, k[0], EXTREMAL_TAIL_REL);
    let series = extremal_f_r(&[r], &MultiIndex::new(k.clone()), &w, p, &MultiIndex::scalar(deg))?;
    let probe = Probe::extremal(&w, p, &[r], &k)?;
    let sp1 = SpaceParams::new(1.0, w.clone(), scheme)?;
    let closed = besov_norm_from_df(|z| probe.eval_df(z).norm(), &sp1)?;
    let via_series = besov_norm(&series, &sp1)?;
    println!(
        "\nclosed form vs series at r = {r} (p = 1): {:.9} vs {:.9} (degree {deg})",
        closed.value, via_series.value
    );
    let z = [C64::new(0.5, -0.3)];
    println!(
        "pointwise: {:.9} vs {:.9}",
        probe.eval_f(&z).re,
        series.eval(&z)?.re
    );

    // When the index condition fails, the predictor the family certifies
    // grows without bound.
    let w_bad = ProductWeight::uniform(WeightFactor::power(2.0)?, 1)?;
    println!("\ndivergence predictor under weight t^2, alpha = 0 (grows like 1/(1-r)):");
    for r in [0.9, 0.95, 0.99] {
        let pred = necessity_predictor(&w_bad, &[0.0], p, &[0], r);
        println!("  r = {r:<5} predictor = {pred:.3}");
    }
    Ok(())
}
