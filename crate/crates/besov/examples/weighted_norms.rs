//! The two weighted norms: the derivative norm on holomorphic inputs and
//! the integral norm, with their closed-form oracles.
//!
//! Run with `cargo run --example weighted_norms`.

use besov::holocalc::{MultiIndex, PolySeries};
use besov::quadrature::QuadratureScheme;
use besov::spaces::{besov_norm, lp_norm, lp_norm_regularized, SpaceParams};
use besov::weights::{ProductWeight, WeightFactor};
use besov::C64;

fn main() -> besov::Result<()> {
    let scheme = QuadratureScheme::new_uniform(1, 64, 256).targeting(1e-9, 3);

    // || z || with p = 2 and trivial weight: Dz = 2z, so the integral is
    // 4 * int |z|^2 dm = 2 pi and the norm is sqrt(2 pi).
    let w1 = ProductWeight::constant_one(1);
    let sp = SpaceParams::new(2.0, w1, scheme.clone())?;
    let f = PolySeries::monomial(MultiIndex::scalar(1));
    let n = besov_norm(&f, &sp)?;
    println!(
        "derivative norm of z (p = 2, weight 1): {:.12}   oracle sqrt(2 pi) = {:.12}",
        n.value,
        (2.0 * std::f64::consts::PI).sqrt()
    );

    // Integral norm of the constant 1 with weight t^2 at p = 1:
    // int (1-|z|^2)^{-2} w(1-|z|) dm = 2 pi (ln 2 - 1/2).
    let w2 = ProductWeight::uniform(WeightFactor::power(2.0)?, 1)?;
    let sp2 = SpaceParams::new(1.0, w2, scheme.clone())?;
    let n2 = lp_norm(|_: &[C64]| C64::new(1.0, 0.0), &sp2)?;
    let oracle = 2.0 * std::f64::consts::PI * (2.0f64.ln() - 0.5);
    println!(
        "integral norm of 1 (p = 1, weight t^2):  {:.12}   oracle 2 pi (ln2 - 1/2) = {:.12}",
        n2.value, oracle
    );

    // Below the finiteness threshold the strict norm refuses; the
    // regularized variant clips the exponent and flags the result.
    let w3 = ProductWeight::uniform(WeightFactor::power(0.5)?, 1)?;
    let sp3 = SpaceParams::new(1.0, w3, scheme)?;
    match lp_norm(|_: &[C64]| C64::new(1.0, 0.0), &sp3) {
        Err(e) => println!("\nstrict integral norm at weight t^0.5: {e}"),
        Ok(_) => unreachable!("measure is not finite here"),
    }
    let reg = lp_norm_regularized(|_: &[C64]| C64::new(1.0, 0.0), &sp3)?;
    println!(
        "regularized value {:.6} (regularized flag = {})",
        reg.value, reg.regularized
    );
    Ok(())
}
