//! Tensor cubature on the polydisc: moment oracles, kernel integrals with a
//! near-boundary base point, and a Monte Carlo cross-check.
//!
//! Run with `cargo run --example disc_quadrature`.

use besov::quadrature::{integrate, integrate_kernel, mc_integrate, KernelForm, QuadratureScheme};
use besov::special::disc_moment;
use besov::C64;

fn main() -> besov::Result<()> {
    let scheme = QuadratureScheme::new_uniform(1, 64, 256).targeting(1e-9, 3);

    // Disc moments: int |z|^{2k} (1-|z|^2)^a dm = pi B(k+1, a+1).
    println!("moment check, int |z|^4 dm:");
    let q = integrate(&scheme, |z| {
        let m = z[0].norm_sqr();
        C64::new(m * m, 0.0)
    })?;
    println!("  cubature {:.12}  oracle {:.12}  est err {:.1e}", q.value.re, disc_moment(0.0, 2), q.est_error);

    // Weighted kernel integral at a base point close to the boundary: the
    // scheme grades the angular rule toward the kernel peak.
    let z = [C64::new(0.9, 0.0)];
    let q = integrate_kernel(&scheme, &[0.0], &[2.0], &z, KernelForm::Holomorphic, |_| {
        C64::new(1.0, 0.0)
    })?;
    // Reproducing normalization: int (1-|w|^2)^0 (1-w zbar)^{-2} dm = pi.
    println!("\nkernel integral at |z| = 0.9 (holomorphic form):");
    println!(
        "  value {:.12} + {:.3e}i  oracle {:.12}  converged {}",
        q.value.re,
        q.value.im,
        std::f64::consts::PI,
        q.converged
    );

    // Modulus form has no cancellation and a larger value.
    let qm = integrate_kernel(&scheme, &[0.0], &[2.0], &z, KernelForm::Modulus, |_| {
        C64::new(1.0, 0.0)
    })?;
    println!("  modulus-form value {:.9} (no cancellation)", qm.value.re);

    // Monte Carlo agrees within a few standard errors.
    let (mc, se) = mc_integrate(
        1,
        |z| {
            let m = z[0].norm_sqr();
            C64::new(m * m, 0.0)
        },
        1_000_000,
        42,
    )?;
    let oracle = disc_moment(0.0, 2);
    println!("\nMonte Carlo cross-check for int |z|^4 dm:");
    println!(
        "  mc {:.6} +- {:.1e}   deviation {:.2} standard errors",
        mc.re,
        se,
        (mc.re - oracle).abs() / se
    );
    Ok(())
}
