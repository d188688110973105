//! The Berezin-type transform: exact normalization on constants, the
//! |zeta|^2 value at the origin, and bidisc factorization.
//!
//! Run with `cargo run --example berezin_normalization`.

use besov::holocalc::Symbol;
use besov::operators::berezin_apply;
use besov::quadrature::QuadratureScheme;
use besov::C64;

fn main() -> besov::Result<()> {
    let scheme = QuadratureScheme::new_uniform(1, 64, 256).targeting(1e-9, 3);
    let one = Symbol::one();

    // The prefactor (alpha+1)/pi (1-|z|^2)^{alpha+2} makes B(1) = 1 exactly,
    // at every z and alpha.
    println!("B(1)(z) across alpha and |z| (oracle 1):");
    for alpha in [0.0, 0.5, 1.0] {
        for zr in [0.0, 0.35, 0.8] {
            let z = [C64::new(zr, 0.0)];
            let q = berezin_apply(&one, &one, &[alpha], &z, &scheme)?;
            println!("  alpha = {alpha:<4} |z| = {zr:<5} value = {:.12}", q.value.re);
        }
    }

    // B(|zeta|^2)(0) = (alpha+1)/pi int |zeta|^2 (1-|zeta|^2)^alpha dm
    //               = 1/(alpha+2).
    println!("\nB(|zeta|^2)(0) (oracle 1/(alpha+2)):");
    let f = Symbol::from_fn("|zeta|^2", 1.0, |z: &[C64]| C64::new(z[0].norm_sqr(), 0.0));
    for alpha in [0.0, 1.0, 2.5] {
        let q = berezin_apply(&f, &one, &[alpha], &[C64::new(0.0, 0.0)], &scheme)?;
        println!(
            "  alpha = {alpha:<4} value = {:.12}   oracle = {:.12}",
            q.value.re,
            1.0 / (alpha + 2.0)
        );
    }

    // On the bidisc the transform factors across coordinates.
    let scheme2 = QuadratureScheme::new_uniform(2, 32, 64).targeting(1e-7, 2);
    let q = berezin_apply(
        &Symbol::one(),
        &Symbol::one(),
        &[0.0, 1.0],
        &[C64::new(0.3, 0.1), C64::new(-0.2, 0.4)],
        &scheme2,
    )?;
    println!("\nbidisc B(1) at a generic point: {:.12} (oracle 1)", q.value.re);
    Ok(())
}
