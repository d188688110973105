//! The Hankel-type operator on conjugate monomials: the closed-form oracle,
//! annihilation of holomorphic inputs, and the output series reconstruction.
//!
//! Run with `cargo run --example hankel_monomials`.

use besov::holocalc::{MultiIndex, Symbol};
use besov::operators::{hankel_apply, hankel_monomial_coeff, hankel_output_series};
use besov::quadrature::QuadratureScheme;
use besov::C64;

fn main() -> besov::Result<()> {
    let scheme = QuadratureScheme::new_uniform(1, 64, 256).targeting(1e-9, 3);
    let g = Symbol::one();
    let z = [C64::new(0.4, -0.25)];

    // On conj(zeta)^k the operator returns (pi / (alpha + 1)) conj(z)^k:
    // the constant does not depend on k.
    println!("conjugate monomials, alpha = 1 (oracle constant pi/2):");
    for k in [0usize, 2, 5] {
        let f = Symbol::conj_monomial(MultiIndex::scalar(k));
        let q = hankel_apply(&f, &g, &[1.0], &z, &scheme)?;
        let oracle = hankel_monomial_coeff(&[1.0]) * z[0].conj().powu(k as u32);
        println!(
            "  k = {k}: value {:.9} + {:.9}i   oracle {:.9} + {:.9}i",
            q.value.re, q.value.im, oracle.re, oracle.im
        );
    }

    // Holomorphic inputs integrate to zero against the conjugate kernel.
    let f = Symbol::from_fn("zeta^3", 1.0, |z: &[C64]| z[0].powu(3));
    let q = hankel_apply(&f, &g, &[0.5], &z, &scheme)?;
    println!("\nholomorphic input zeta^3: |value| = {:.2e} (annihilated)", q.value.norm());

    // Output reconstruction: with f = conj(zeta)^3 the output series has a
    // single conjugate-monomial term.
    let f = Symbol::conj_monomial(MultiIndex::scalar(3));
    let (series, quad) = hankel_output_series(&f, &g, &[0.0], &MultiIndex::scalar(5), &scheme)?;
    println!("\noutput series for f = conj(zeta)^3, alpha = 0:");
    for (k, c) in series.terms() {
        if c.norm() > 1e-9 {
            println!("  conj(z)^{}: {:.9}", k.0[0], c.re);
        }
    }
    println!("  (max inner rel err {:.1e})", quad.max_rel_est_error);
    Ok(())
}
