//! Hankel- and Berezin-type integral operators against Bergman kernels on
//! the polydisc, plus their finite matrix sections.
//!
//! Both operators integrate f*g against a kernel with per-factor exponent
//! vector alpha (each entry > -1):
//!
//!   hankel:  int (1-|zeta|^2)^alpha prod_j (1 - zeta_j conj(z_j))^{-(alpha_j+2)} f g dm
//!   berezin: prod_j [(alpha_j+1)/pi (1-|z_j|^2)^{alpha_j+2}]
//!              * int (1-|zeta|^2)^alpha prod_j |1 - z_j conj(zeta_j)|^{-(2 alpha_j + 4)} f g dm
//!
//! The Hankel output is conjugate-holomorphic; expanding the kernel gives its
//! coefficient against conj(z)^l as Gamma(alpha+2+l)/(Gamma(alpha+2) l!)
//! times the weighted moment of zeta^l f g, which is what
//! [`hankel_output_series`] and [`finite_section`] compute directly.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::holocalc::{MultiIndex, PolySeries, Symbol};
use crate::quadrature::{integrate, integrate_kernel, KernelForm, Quad, QuadratureScheme};
use crate::report::QuadSummary;
use crate::special::frac_multiplier;
use crate::C64;

fn validate_alpha(alpha: &[f64], dim: usize) -> Result<()> {
    if alpha.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: alpha.len() });
    }
    for a in alpha {
        if !(a.is_finite() && *a > -1.0) {
            return Err(Error::Domain(format!("kernel exponent {a} must be finite and > -1")));
        }
    }
    Ok(())
}

/// Pointwise symbol backed by a coefficient series (used to feed series
/// inputs to the operators, whose integrands are plain closures).
pub fn series_symbol(s: std::sync::Arc<PolySeries>) -> Symbol {
    let bound: f64 = s.terms().iter().map(|(_, c)| c.norm()).sum();
    Symbol::from_fn("series", bound, move |z| s.eval_unchecked(z))
}

/// Kernel expansion coefficient prod_j Gamma(alpha_j+2+l_j) /
/// (Gamma(alpha_j+2) l_j!).
pub fn kernel_coeff(alpha: &[f64], l: &MultiIndex) -> f64 {
    alpha
        .iter()
        .zip(&l.0)
        .map(|(a, lj)| frac_multiplier(a + 1.0, *lj))
        .product()
}

/// Exact value of the operator applied with unit symbol to conj(zeta)^k:
/// the output is this constant times conj(z)^k, independent of k.
pub fn hankel_monomial_coeff(alpha: &[f64]) -> f64 {
    alpha.iter().map(|a| PI / (a + 1.0)).product()
}

/// Pointwise evaluation of the Hankel-type operator at an interior z.
pub fn hankel_apply(
    f: &Symbol,
    g: &Symbol,
    alpha: &[f64],
    z: &[C64],
    scheme: &QuadratureScheme,
) -> Result<Quad> {
    validate_alpha(alpha, scheme.dim())?;
    let b: Vec<f64> = alpha.iter().map(|a| a + 2.0).collect();
    integrate_kernel(scheme, alpha, &b, z, KernelForm::Holomorphic, |zeta| {
        f.eval(zeta) * g.eval(zeta)
    })
}

/// Normalizing prefactor prod_j (alpha_j+1)/pi (1-|z_j|^2)^{alpha_j+2};
/// exactly cancels the kernel mass so the transform fixes constants.
pub fn berezin_prefactor(alpha: &[f64], z: &[C64]) -> f64 {
    alpha
        .iter()
        .zip(z)
        .map(|(aj, zj)| (aj + 1.0) / PI * (1.0 - zj.norm_sqr()).powf(aj + 2.0))
        .product()
}

/// Pointwise evaluation of the Berezin-type transform at an interior z.
pub fn berezin_apply(
    f: &Symbol,
    g: &Symbol,
    alpha: &[f64],
    z: &[C64],
    scheme: &QuadratureScheme,
) -> Result<Quad> {
    validate_alpha(alpha, scheme.dim())?;
    if z.len() != alpha.len() {
        return Err(Error::DimensionMismatch { expected: alpha.len(), got: z.len() });
    }
    let b: Vec<f64> = alpha.iter().map(|a| 2.0 * a + 4.0).collect();
    let q = integrate_kernel(scheme, alpha, &b, z, KernelForm::Modulus, |zeta| {
        f.eval(zeta) * g.eval(zeta)
    })?;
    let prefactor = berezin_prefactor(alpha, z);
    Ok(Quad { value: q.value * prefactor, est_error: q.est_error * prefactor, ..q })
}

fn absorb_alpha(scheme: &QuadratureScheme, alpha: &[f64]) -> Result<QuadratureScheme> {
    let mut derived = scheme.clone();
    for (rule, aj) in derived.rules.iter_mut().zip(alpha) {
        let total = rule.jacobi_exponent + aj;
        if !(total > -1.0) {
            return Err(Error::Domain(format!("combined exponent {total} must be > -1")));
        }
        rule.jacobi_exponent = total;
    }
    Ok(derived)
}

fn monomial_value(zeta: &[C64], l: &MultiIndex) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for (zj, lj) in zeta.iter().zip(&l.0) {
        v *= zj.powu(*lj as u32);
    }
    v
}

/// Conjugate-oriented coefficient series of the Hankel output, truncated to
/// `degree_bound`: coefficient of conj(z)^l is kernel_coeff(alpha, l) times
/// the (1-|zeta|^2)^alpha-weighted moment of zeta^l f g. One cubature per
/// retained index.
pub fn hankel_output_series(
    f: &Symbol,
    g: &Symbol,
    alpha: &[f64],
    degree_bound: &MultiIndex,
    scheme: &QuadratureScheme,
) -> Result<(PolySeries, QuadSummary)> {
    let n = scheme.dim();
    validate_alpha(alpha, n)?;
    if degree_bound.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: degree_bound.dim() });
    }
    let derived = absorb_alpha(scheme, alpha)?;
    let mut summary = QuadSummary::default();
    let mut terms = Vec::with_capacity(MultiIndex::box_iter(degree_bound).len());
    for l in MultiIndex::box_iter(degree_bound) {
        let q = integrate(&derived, |zeta: &[C64]| {
            monomial_value(zeta, &l) * f.eval(zeta) * g.eval(zeta)
        })?;
        summary.absorb(q.rel_error(), q.converged);
        let c = kernel_coeff(alpha, &l);
        terms.push((l, q.value * c));
    }
    let series = PolySeries::from_terms(n, degree_bound.clone(), &terms, true)?;
    Ok((series, summary))
}

/// Matrix of the Hankel-type operator between monomial sections: rows range
/// over output indices l <= out_bound (coefficients against conj(z)^l),
/// columns over input indices k <= in_bound (inputs zeta^k). Entries depend
/// on the moment of zeta^{l+k} g only, so moments are cached by the sum.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub alpha: Vec<f64>,
    pub in_indices: Vec<MultiIndex>,
    pub out_indices: Vec<MultiIndex>,
    /// Row-major: entries[row * in_indices.len() + col].
    pub entries: Vec<C64>,
    pub quad: QuadSummary,
}

impl FiniteSection {
    pub fn nrows(&self) -> usize {
        self.out_indices.len()
    }

    pub fn ncols(&self) -> usize {
        self.in_indices.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.ncols() + col]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn finite_section(
    g: &Symbol,
    alpha: &[f64],
    in_bound: &MultiIndex,
    out_bound: &MultiIndex,
    scheme: &QuadratureScheme,
) -> Result<FiniteSection> {
    let n = scheme.dim();
    validate_alpha(alpha, n)?;
    if in_bound.dim() != n || out_bound.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: in_bound.dim().min(out_bound.dim()),
        });
    }
    let derived = absorb_alpha(scheme, alpha)?;
    let sum_bound = MultiIndex::new(
        in_bound.0.iter().zip(&out_bound.0).map(|(a, b)| a + b).collect(),
    );
    let mut summary = QuadSummary::default();
    let mut moments = std::collections::BTreeMap::new();
    for s in MultiIndex::box_iter(&sum_bound) {
        let q = integrate(&derived, |zeta: &[C64]| monomial_value(zeta, &s) * g.eval(zeta))?;
        summary.absorb(q.rel_error(), q.converged);
        moments.insert(s, q.value);
    }
    let in_indices = MultiIndex::box_iter(in_bound);
    let out_indices = MultiIndex::box_iter(out_bound);
    let mut entries = Vec::with_capacity(in_indices.len() * out_indices.len());
    for l in &out_indices {
        let c = kernel_coeff(alpha, l);
        for k in &in_indices {
            let s = MultiIndex::new(l.0.iter().zip(&k.0).map(|(a, b)| a + b).collect());
            entries.push(moments[&s] * c);
        }
    }
    Ok(FiniteSection {
        alpha: alpha.to_vec(),
        in_indices,
        out_indices,
        entries,
        quad: summary,
    })
}
