//! Truncated power series on the polydisc and the coefficient calculus on
//! them: fractional differentiation, the boundary-concentrating extremal
//! family, and phase-cancelling symbols.
//!
//! A series is stored densely in row-major lexicographic order over its
//! degree box, and evaluation is nested Horner per axis, so both the memory
//! layout and the summation order are fixed. The `conjugated` flag selects
//! between sum a_k z^k and sum a_k conj(z)^k with the same coefficients.

use std::sync::Arc;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::special::{binomial_series, frac_multiplier};
use crate::weights::ProductWeight;
use crate::C64;

/// Relative tail mass allowed when the extremal family is truncated.
pub const EXTREMAL_TAIL_REL: f64 = 1e-10;

/// Hard cap on per-axis truncation degree for the extremal family.
pub const EXTREMAL_DEGREE_CAP: usize = 60_000;

// ---------------------------------------------------------------------------
// Multi-indices and fractional orders
// ---------------------------------------------------------------------------

/// Exponent tuple k = (k_1, ..., k_n), one entry per disc factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }

    pub fn scalar(k: usize) -> Self {
        MultiIndex(vec![k])
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Componentwise k_j <= b_j.
    pub fn inside(&self, bound: &MultiIndex) -> bool {
        self.dim() == bound.dim() && self.0.iter().zip(&bound.0).all(|(k, b)| k <= b)
    }

    /// All multi-indices with k_j <= bound_j, in lexicographic order.
    pub fn box_iter(bound: &MultiIndex) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; bound.dim()];
        loop {
            out.push(MultiIndex(cur.clone()));
            // odometer increment, last axis fastest
            let mut axis = bound.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < bound.0[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = 0;
            }
        }
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Fractional differentiation order b = (b_1, ..., b_n), each b_j > -1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FracOrder(Vec<f64>);

impl FracOrder {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidInput("fractional order must be nonempty".into()));
        }
        if let Some(b) = v.iter().find(|b| **b <= -1.0 || !b.is_finite()) {
            return Err(Error::Domain(format!(
                "fractional order component {b} outside (-1, inf)"
            )));
        }
        Ok(FracOrder(v))
    }

    /// The ordinary-derivative order (1, ..., 1).
    pub fn ones(dim: usize) -> Self {
        FracOrder(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

// ---------------------------------------------------------------------------
// PolySeries
// ---------------------------------------------------------------------------

/// Truncated power series sum_{k <= N} a_k z^k on the polydisc (or the same
/// coefficients against conj(z)^k when `conjugated`).
#[derive(Clone, Debug, PartialEq)]
pub struct PolySeries {
    dim: usize,
    degree_bound: Vec<usize>,
    /// Dense, row-major lexicographic: the last axis varies fastest.
    coeffs: Vec<Complex64>,
    conjugated: bool,
}

impl PolySeries {
    pub fn zero(dim: usize, degree_bound: MultiIndex) -> Result<Self> {
        if dim == 0 || degree_bound.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: degree_bound.dim(),
            });
        }
        let len = degree_bound
            .0
            .iter()
            .try_fold(1usize, |acc, n| acc.checked_mul(n + 1))
            .filter(|len| *len <= (1 << 27))
            .ok_or_else(|| {
                Error::InvalidInput("degree box too large to store densely".into())
            })?;
        Ok(PolySeries {
            dim,
            degree_bound: degree_bound.0,
            coeffs: vec![C64::new(0.0, 0.0); len],
            conjugated: false,
        })
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        let mut s = PolySeries::zero(dim, MultiIndex::zeros(dim)).expect("constant series");
        s.coeffs[0] = c;
        s
    }

    /// Single monomial z^k with unit coefficient.
    pub fn monomial(k: MultiIndex) -> Self {
        let dim = k.dim();
        let mut s = PolySeries::zero(dim, k.clone()).expect("monomial series");
        let flat = s.flat_index(&k).expect("in box");
        s.coeffs[flat] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_terms(
        dim: usize,
        degree_bound: MultiIndex,
        terms: &[(MultiIndex, C64)],
        conjugated: bool,
    ) -> Result<Self> {
        let mut s = PolySeries::zero(dim, degree_bound)?;
        s.conjugated = conjugated;
        for (k, c) in terms {
            let flat = s.flat_index(k).ok_or_else(|| {
                Error::InvalidInput(format!("term index {k} outside degree bound"))
            })?;
            s.coeffs[flat] += *c;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree_bound(&self) -> MultiIndex {
        MultiIndex(self.degree_bound.clone())
    }

    pub fn is_conjugated(&self) -> bool {
        self.conjugated
    }

    /// Same coefficients against the other orientation.
    pub fn mirrored(&self) -> Self {
        let mut s = self.clone();
        s.conjugated = !s.conjugated;
        s
    }

    pub fn coeff(&self, k: &MultiIndex) -> C64 {
        self.flat_index(k).map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: &MultiIndex, c: C64) -> Result<()> {
        let i = self.flat_index(k).ok_or_else(|| {
            Error::InvalidInput(format!("index {k} outside degree bound"))
        })?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut s = self.clone();
        for a in &mut s.coeffs {
            *a *= c;
        }
        s
    }

    /// Coefficientwise sum; bounds must match, orientation must match.
    pub fn add(&self, other: &PolySeries) -> Result<Self> {
        if self.dim != other.dim
            || self.degree_bound != other.degree_bound
            || self.conjugated != other.conjugated
        {
            return Err(Error::InvalidInput(
                "series addition requires matching degree box and orientation".into(),
            ));
        }
        let mut s = self.clone();
        for (a, b) in s.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
        Ok(s)
    }

    fn flat_index(&self, k: &MultiIndex) -> Option<usize> {
        if k.dim() != self.dim {
            return None;
        }
        let mut flat = 0usize;
        for (kj, nj) in k.0.iter().zip(&self.degree_bound) {
            if kj > nj {
                return None;
            }
            flat = flat * (nj + 1) + kj;
        }
        Some(flat)
    }

    /// Nonzero terms in lexicographic order (serialization and display).
    pub fn terms(&self) -> Vec<(MultiIndex, C64)> {
        let mut out = Vec::new();
        for (flat, c) in self.coeffs.iter().enumerate() {
            if c.re != 0.0 || c.im != 0.0 {
                out.push((self.unflatten(flat), *c));
            }
        }
        out
    }

    fn unflatten(&self, mut flat: usize) -> MultiIndex {
        let mut k = vec![0usize; self.dim];
        for axis in (0..self.dim).rev() {
            let w = self.degree_bound[axis] + 1;
            k[axis] = flat % w;
            flat /= w;
        }
        MultiIndex(k)
    }

    /// Evaluate at an interior point of the polydisc.
    ///
    /// Nested Horner, one level per axis; the reduction order is a pure
    /// function of the degree box.
    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        if z.iter().any(|zj| zj.norm_sqr() >= 1.0) {
            return Err(Error::Domain(
                "series evaluation requires |z_j| < 1 on every factor".into(),
            ));
        }
        let mut vars: Vec<C64> = z.to_vec();
        if self.conjugated {
            for v in &mut vars {
                *v = v.conj();
            }
        }
        Ok(horner(&self.coeffs, &self.degree_bound, &vars))
    }

    /// Evaluation without the boundary check, for quadrature inner loops
    /// whose nodes are interior by construction.
    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        let mut vars: Vec<C64> = z.to_vec();
        if self.conjugated {
            for v in &mut vars {
                *v = v.conj();
            }
        }
        horner(&self.coeffs, &self.degree_bound, &vars)
    }

    /// Fractional coefficient differentiation of order `b`: each a_k is
    /// multiplied by prod_j Gamma(b_j+1+k_j) / (Gamma(b_j+1) Gamma(k_j+1)).
    ///
    /// With b = (1,...,1) the multiplier is prod (k_j + 1), the coefficient
    /// form of the mixed derivative d^n(z_1...z_n f)/dz_1...dz_n.
    pub fn frac_diff(&self, b: &FracOrder) -> Result<PolySeries> {
        if b.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: b.dim(),
            });
        }
        if self.conjugated {
            return Err(Error::Constraint(
                "fractional differentiation is defined on the holomorphic orientation; mirror first"
                    .into(),
            ));
        }
        // Per-axis multiplier tables, then a product per stored coefficient.
        let tables: Vec<Vec<f64>> = b
            .components()
            .iter()
            .zip(&self.degree_bound)
            .map(|(bj, nj)| (0..=*nj).map(|k| frac_multiplier(*bj, k)).collect())
            .collect();
        let mut out = self.clone();
        let mut k = vec![0usize; self.dim];
        for flat in 0..out.coeffs.len() {
            let mut m = 1.0;
            for (axis, kj) in k.iter().enumerate() {
                m *= tables[axis][*kj];
            }
            out.coeffs[flat] *= m;
            // odometer over the degree box, last axis fastest
            for axis in (0..self.dim).rev() {
                if k[axis] < self.degree_bound[axis] {
                    k[axis] += 1;
                    break;
                }
                k[axis] = 0;
            }
        }
        Ok(out)
    }
}

fn horner(coeffs: &[C64], bounds: &[usize], z: &[C64]) -> C64 {
    if bounds.len() == 1 {
        let zj = z[0];
        let mut acc = C64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * zj + c;
        }
        return acc;
    }
    let chunk = coeffs.len() / (bounds[0] + 1);
    let zj = z[0];
    let mut acc = C64::new(0.0, 0.0);
    for block in coeffs.chunks(chunk).rev() {
        acc = acc * zj + horner(block, &bounds[1..], &z[1..]);
    }
    acc
}

// ---------------------------------------------------------------------------
// Serde: sparse interchange schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermRepr {
    k: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    dim: usize,
    degree_bound: Vec<usize>,
    conjugated: bool,
    coeffs: Vec<TermRepr>,
}

impl Serialize for PolySeries {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SeriesRepr {
            dim: self.dim,
            degree_bound: self.degree_bound.clone(),
            conjugated: self.conjugated,
            coeffs: self
                .terms()
                .into_iter()
                .map(|(k, c)| TermRepr { k: k.0, re: c.re, im: c.im })
                .collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PolySeries {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(de)?;
        let terms: Vec<(MultiIndex, C64)> = repr
            .coeffs
            .into_iter()
            .map(|t| (MultiIndex(t.k), C64::new(t.re, t.im)))
            .collect();
        PolySeries::from_terms(
            repr.dim,
            MultiIndex(repr.degree_bound),
            &terms,
            repr.conjugated,
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Extremal family
// ---------------------------------------------------------------------------

/// Smallest per-axis degree so the dropped tail of (1 - r z)^{-k} is below
/// `rel_tol` of the full coefficient sum (1 - r)^{-k}.
pub fn required_degree(r: f64, k: usize, rel_tol: f64) -> usize {
    if r == 0.0 {
        return 0;
    }
    let total = (1.0 - r).powi(-(k as i32));
    let mut c = 1.0f64; // c_m r^m, starting at m = 0
    let mut m = 0usize;
    loop {
        let rho = r * (k as f64 + m as f64 + 1.0) / (m as f64 + 2.0);
        if rho < 1.0 && c / (1.0 - rho) <= rel_tol * total {
            return m;
        }
        c *= r * (k as f64 + m as f64) / (m as f64 + 1.0);
        m += 1;
        if m > 10 * EXTREMAL_DEGREE_CAP {
            return m;
        }
    }
}

/// The normalized extremal family
/// f_r(z) = C_r prod_j (1 - r_j z_j)^{-k_j},
/// C_r = prod_j (1 - r_j)^{k_j} w_j(1 - r_j)^{-1/p},
/// expanded to the requested degree box.
///
/// The exponents must satisfy k_j > (a_{w_j} + 2)/p, which pins the norm
/// scale of the family as r -> 1. The requested box must hold the series
/// to within [`EXTREMAL_TAIL_REL`] relative tail mass; otherwise the error
/// reports the degree that would be required.
pub fn extremal_f_r(
    r: &[f64],
    k: &MultiIndex,
    w: &ProductWeight,
    p: f64,
    degree_bound: &MultiIndex,
) -> Result<PolySeries> {
    let n = r.len();
    if k.dim() != n || w.dim() != n || degree_bound.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k.dim() });
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("p must be positive and finite, got {p}")));
    }
    for (j, rj) in r.iter().enumerate() {
        if !(0.0..1.0).contains(rj) {
            return Err(Error::Domain(format!("r_{j} = {rj} outside [0, 1)")));
        }
        let a_w = w.factor(j).regularity_indices()?.0;
        let min_k = (a_w + 2.0) / p;
        if (k.0[j] as f64) <= min_k {
            return Err(Error::Constraint(format!(
                "extremal exponent k_{j} = {} must exceed (a_w + 2)/p = {min_k:.6}",
                k.0[j]
            )));
        }
        let need = required_degree(*rj, k.0[j], EXTREMAL_TAIL_REL);
        if need > degree_bound.0[j] {
            return Err(Error::Truncation {
                requested: degree_bound.0[j],
                required: need,
                r: *rj,
            });
        }
    }

    // C_r; weight factors evaluated on (0, 1], with w(1) the r -> 0 limit.
    let mut c_r = 1.0f64;
    for (j, rj) in r.iter().enumerate() {
        let t = 1.0 - rj;
        c_r *= t.powi(k.0[j] as i32) * w.factor(j).eval_closure(t).powf(-1.0 / p);
    }

    // Per-axis coefficient vectors c_m^{(j)} = binom(k_j + m - 1, m) r_j^m.
    let axis_coeffs: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut v = binomial_series(k.0[j] as f64, degree_bound.0[j] + 1);
            let mut rm = 1.0;
            for (m, c) in v.iter_mut().enumerate() {
                *c *= rm;
                if m < degree_bound.0[j] {
                    rm *= r[j];
                }
            }
            v
        })
        .collect();

    let mut s = PolySeries::zero(n, degree_bound.clone())?;
    let mut idx = vec![0usize; n];
    for flat in 0..s.coeffs.len() {
        let mut v = c_r;
        for (axis, m) in idx.iter().enumerate() {
            v *= axis_coeffs[axis][*m];
        }
        s.coeffs[flat] = C64::new(v, 0.0);
        for axis in (0..n).rev() {
            if idx[axis] < degree_bound.0[axis] {
                idx[axis] += 1;
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(s)
}

/// Closed-form derivative values for cross-checking the series route:
/// (D f_r)(z) for n = 1, where D multiplies coefficient a_k by (k + 1),
/// i.e. D f = d(z f)/dz = f + z f'.
pub fn extremal_df_closed_form(r: f64, k: usize, c_r: f64, z: C64) -> C64 {
    let base = (C64::new(1.0, 0.0) - r * z).powf(-(k as f64));
    let fprime = (k as f64) * r * (C64::new(1.0, 0.0) - r * z).powf(-(k as f64) - 1.0);
    c_r * (base + z * fprime)
}

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

/// How a phase-cancelling symbol reads the exponent in exp(-arg f).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// g = exp(-i arg f): unimodular, so g f = |f|. Default.
    Unimodular,
    /// g = exp(-arg f): real exponential of the argument, bounded by e^pi.
    RealExp,
}

impl PhaseConvention {
    /// Serde default hook for configs.
    pub fn default_unimodular() -> Self {
        PhaseConvention::Unimodular
    }
}

/// A bounded measurable symbol on the polydisc with a declared sup bound.
#[derive(Clone)]
pub struct Symbol {
    f: Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>,
    sup_bound: f64,
    label: String,
}

impl Symbol {
    pub fn from_fn<F>(label: impl Into<String>, sup_bound: f64, f: F) -> Self
    where
        F: Fn(&[C64]) -> C64 + Send + Sync + 'static,
    {
        Symbol { f: Arc::new(f), sup_bound, label: label.into() }
    }

    pub fn one() -> Self {
        Symbol::from_fn("one", 1.0, |_| C64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Symbol::from_fn("zero", 0.0, |_| C64::new(0.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Symbol::from_fn(format!("const({c})"), c.norm(), move |_| c)
    }

    /// conj(z)^d as a symbol.
    pub fn conj_monomial(d: MultiIndex) -> Self {
        Symbol::from_fn(format!("conj_monomial({d})"), 1.0, move |z| {
            let mut v = C64::new(1.0, 0.0);
            for (zj, dj) in z.iter().zip(&d.0) {
                v *= zj.conj().powu(*dj as u32);
            }
            v
        })
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        (self.f)(z)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Symbol({}, sup<={})", self.label, self.sup_bound)
    }
}

/// Phase-cancelling symbol built from a series: at each point it evaluates
/// f and emits exp(-i arg f) (or exp(-arg f) under [`PhaseConvention::RealExp`]).
/// Zeros of f map to 1 so the symbol stays well-defined.
pub fn symbol_g_r(f: Arc<PolySeries>, convention: PhaseConvention) -> Symbol {
    let bound = match convention {
        PhaseConvention::Unimodular => 1.0,
        PhaseConvention::RealExp => std::f64::consts::PI.exp(),
    };
    let label = match convention {
        PhaseConvention::Unimodular => "phase(unimodular)",
        PhaseConvention::RealExp => "phase(real-exp)",
    };
    Symbol::from_fn(label, bound, move |z| {
        let v = f.eval_unchecked(z);
        let m = v.norm();
        if m == 0.0 {
            return C64::new(1.0, 0.0);
        }
        match convention {
            PhaseConvention::Unimodular => v.conj() / m,
            PhaseConvention::RealExp => C64::new((-v.arg()).exp(), 0.0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{ProductWeight, WeightFactor};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn box_iter_is_lexicographic() {
        let b = MultiIndex::new(vec![1, 2]);
        let ks = MultiIndex::box_iter(&b);
        let flat: Vec<Vec<usize>> = ks.into_iter().map(|k| k.0).collect();
        assert_eq!(
            flat,
            vec![
                vec![0, 0], vec![0, 1], vec![0, 2],
                vec![1, 0], vec![1, 1], vec![1, 2]
            ]
        );
    }

    #[test]
    fn eval_constant_anywhere() {
        let s = PolySeries::constant(2, c(2.5, -1.0));
        let v = s.eval(&[c(0.3, 0.2), c(-0.5, 0.1)]).unwrap();
        assert_relative_eq!(v.re, 2.5, max_relative = 1e-15);
        assert_relative_eq!(v.im, -1.0, max_relative = 1e-15);
    }

    #[test]
    fn eval_geometric_partial_sum() {
        // sum_{j<=50} z^j at z = 1/2 equals (1 - 0.5^51) / (1 - 0.5)
        let terms: Vec<(MultiIndex, C64)> =
            (0..=50).map(|j| (MultiIndex::scalar(j), c(1.0, 0.0))).collect();
        let s = PolySeries::from_terms(1, MultiIndex::scalar(50), &terms, false).unwrap();
        let v = s.eval(&[c(0.5, 0.0)]).unwrap();
        let expect = (1.0 - 0.5f64.powi(51)) / 0.5;
        assert_relative_eq!(v.re, expect, max_relative = 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn eval_bivariate_monomial() {
        let s = PolySeries::monomial(MultiIndex::new(vec![1, 1]));
        let v = s.eval(&[c(0.3, 0.0), c(0.0, 0.4)]).unwrap();
        assert_relative_eq!(v.im, 0.12, max_relative = 1e-15);
        assert!(v.re.abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_boundary() {
        let s = PolySeries::monomial(MultiIndex::scalar(1));
        assert!(s.eval(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn conjugated_eval_uses_conj_variables() {
        let s = PolySeries::monomial(MultiIndex::scalar(2)).mirrored();
        let z = c(0.3, 0.4);
        let v = s.eval(&[z]).unwrap();
        let want = z.conj() * z.conj();
        assert_relative_eq!(v.re, want.re, max_relative = 1e-15);
        assert_relative_eq!(v.im, want.im, max_relative = 1e-15);
    }

    #[test]
    fn frac_diff_identity_and_ordinary() {
        let s = PolySeries::monomial(MultiIndex::scalar(3));
        let id = s.frac_diff(&FracOrder::new(vec![0.0]).unwrap()).unwrap();
        assert_eq!(id, s);
        let d = s.frac_diff(&FracOrder::ones(1)).unwrap();
        assert_relative_eq!(d.coeff(&MultiIndex::scalar(3)).re, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn frac_diff_mixed_two_axes() {
        // z1^2 z2 -> (2+1)(1+1) = 6 z1^2 z2, the mixed-derivative multiplier
        let s = PolySeries::monomial(MultiIndex::new(vec![2, 1]));
        let d = s.frac_diff(&FracOrder::ones(2)).unwrap();
        assert_relative_eq!(
            d.coeff(&MultiIndex::new(vec![2, 1])).re,
            6.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn frac_diff_half_order() {
        let s = PolySeries::monomial(MultiIndex::scalar(1));
        let d = s.frac_diff(&FracOrder::new(vec![0.5]).unwrap()).unwrap();
        assert_relative_eq!(d.coeff(&MultiIndex::scalar(1)).re, 1.5, max_relative = 1e-13);
    }

    #[test]
    fn frac_diff_is_linear() {
        let a = PolySeries::from_terms(
            1,
            MultiIndex::scalar(4),
            &[(MultiIndex::scalar(1), c(2.0, 1.0)), (MultiIndex::scalar(4), c(-0.5, 0.0))],
            false,
        )
        .unwrap();
        let b = PolySeries::from_terms(
            1,
            MultiIndex::scalar(4),
            &[(MultiIndex::scalar(0), c(1.0, 0.0)), (MultiIndex::scalar(4), c(0.25, 3.0))],
            false,
        )
        .unwrap();
        let beta = FracOrder::new(vec![0.7]).unwrap();
        let lhs = a.add(&b).unwrap().frac_diff(&beta).unwrap();
        let rhs = a.frac_diff(&beta).unwrap().add(&b.frac_diff(&beta).unwrap()).unwrap();
        for k in 0..=4 {
            let ki = MultiIndex::scalar(k);
            assert_relative_eq!(lhs.coeff(&ki).re, rhs.coeff(&ki).re, max_relative = 1e-14);
            assert_relative_eq!(lhs.coeff(&ki).im, rhs.coeff(&ki).im, max_relative = 1e-14);
        }
    }

    #[test]
    fn frac_diff_finite_difference_check() {
        // D f = d(z f)/dz compared against a central difference of z f(z).
        let s = PolySeries::from_terms(
            1,
            MultiIndex::scalar(5),
            &[
                (MultiIndex::scalar(0), c(0.7, 0.0)),
                (MultiIndex::scalar(2), c(-1.0, 0.5)),
                (MultiIndex::scalar(5), c(0.3, 0.3)),
            ],
            false,
        )
        .unwrap();
        let d = s.frac_diff(&FracOrder::ones(1)).unwrap();
        let z = c(0.35, 0.2);
        let h = 1e-4;
        let g = |w: C64| w * s.eval(&[w]).unwrap();
        let fd = (g(z + c(h, 0.0)) - g(z - c(h, 0.0))) / c(2.0 * h, 0.0);
        let got = d.eval(&[z]).unwrap();
        assert!((got - fd).norm() < 1e-6, "|{got} - {fd}|");
    }

    #[test]
    fn frac_diff_refuses_conjugated() {
        let s = PolySeries::monomial(MultiIndex::scalar(1)).mirrored();
        assert!(s.frac_diff(&FracOrder::ones(1)).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = PolySeries::from_terms(
            2,
            MultiIndex::new(vec![2, 1]),
            &[
                (MultiIndex::new(vec![0, 1]), c(1.5, -0.25)),
                (MultiIndex::new(vec![2, 0]), c(0.0, 2.0)),
            ],
            true,
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: PolySeries = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn serde_rejects_out_of_box_terms() {
        let json = r#"{"dim":1,"degree_bound":[2],"conjugated":false,
                       "coeffs":[{"k":[5],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<PolySeries>(json).is_err());
    }

    fn w_pow(a: f64) -> ProductWeight {
        ProductWeight::new(vec![WeightFactor::power(a).unwrap()]).unwrap()
    }

    #[test]
    fn extremal_r_zero_is_constant_one() {
        // C_0 = w(1)^{-1/p} = 1 for the plain power family
        let f = extremal_f_r(
            &[0.0],
            &MultiIndex::scalar(2),
            &w_pow(0.5),
            2.0,
            &MultiIndex::scalar(4),
        )
        .unwrap();
        assert_relative_eq!(f.coeff(&MultiIndex::scalar(0)).re, 1.0, max_relative = 1e-14);
        for k in 1..=4 {
            assert_eq!(f.coeff(&MultiIndex::scalar(k)).norm(), 0.0);
        }
    }

    #[test]
    fn extremal_coefficient_law_k2() {
        // a_m = C_r (m + 1) r^m for k = 2
        let r = 0.5;
        let p = 1.0;
        let f = extremal_f_r(
            &[r],
            &MultiIndex::scalar(2),
            &w_pow(-0.5),
            p,
            &MultiIndex::scalar(required_degree(r, 2, EXTREMAL_TAIL_REL)),
        )
        .unwrap();
        let c_r = (1.0 - r) * (1.0 - r) * (1.0 - r + 0.0f64).powf(0.5); // (1-r)^k w(1-r)^{-1}
        for m in [0usize, 1, 3, 7] {
            let want = c_r * (m as f64 + 1.0) * r.powi(m as i32);
            assert_relative_eq!(f.coeff(&MultiIndex::scalar(m)).re, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn extremal_requires_capacity() {
        let err = extremal_f_r(
            &[0.9],
            &MultiIndex::scalar(6),
            &w_pow(0.5),
            0.5,
            &MultiIndex::scalar(10),
        )
        .unwrap_err();
        match err {
            Error::Truncation { required, requested, .. } => {
                assert!(required > requested);
            }
            other => panic!("expected truncation error, got {other}"),
        }
    }

    #[test]
    fn extremal_rejects_small_exponent() {
        // k must exceed (a_w + 2)/p = 5 here
        let err = extremal_f_r(
            &[0.5],
            &MultiIndex::scalar(5),
            &w_pow(0.5),
            0.5,
            &MultiIndex::scalar(100),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn extremal_truncation_tail_is_small() {
        let r = 0.7;
        let k = 3;
        let n = required_degree(r, k, EXTREMAL_TAIL_REL);
        let f = extremal_f_r(
            &[r],
            &MultiIndex::scalar(k),
            &w_pow(-0.5),
            1.0,
            &MultiIndex::scalar(n),
        )
        .unwrap();
        // value at a real point vs the closed form
        let z = c(0.8, 0.0);
        let closed = f.coeff(&MultiIndex::scalar(0)).re * (1.0 - r * 0.8).powi(-(k as i32));
        let got = f.eval(&[z]).unwrap().re;
        assert_relative_eq!(got, closed, max_relative = 1e-9);
    }

    #[test]
    fn symbol_phase_cancels() {
        let f = Arc::new(
            PolySeries::from_terms(
                1,
                MultiIndex::scalar(2),
                &[(MultiIndex::scalar(0), c(0.4, -0.3)), (MultiIndex::scalar(2), c(1.0, 1.0))],
                false,
            )
            .unwrap(),
        );
        let g = symbol_g_r(f.clone(), PhaseConvention::Unimodular);
        for z in [c(0.1, 0.2), c(-0.5, 0.3), c(0.0, 0.0)] {
            let fv = f.eval(&[z]).unwrap();
            let gv = g.eval(&[z]);
            assert!(gv.norm() <= 1.0 + 1e-15);
            let prod = gv * fv;
            assert!((prod - c(fv.norm(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn symbol_conventions() {
        // constant positive series: both conventions give 1
        let f = Arc::new(PolySeries::constant(1, c(2.0, 0.0)));
        let gu = symbol_g_r(f.clone(), PhaseConvention::Unimodular);
        let gr = symbol_g_r(f.clone(), PhaseConvention::RealExp);
        let z = [c(0.2, 0.1)];
        assert!((gu.eval(&z) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((gr.eval(&z) - c(1.0, 0.0)).norm() < 1e-15);
        // purely imaginary value i*2: unimodular gives -i, real-exp gives e^{-pi/2}
        let f = Arc::new(PolySeries::constant(1, c(0.0, 2.0)));
        let gu = symbol_g_r(f.clone(), PhaseConvention::Unimodular);
        let gr = symbol_g_r(f, PhaseConvention::RealExp);
        assert!((gu.eval(&z) - c(0.0, -1.0)).norm() < 1e-15);
        assert_relative_eq!(
            gr.eval(&z).re,
            (-std::f64::consts::FRAC_PI_2).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn symbol_zero_input_guard() {
        let f = Arc::new(PolySeries::constant(1, c(0.0, 0.0)));
        let g = symbol_g_r(f, PhaseConvention::Unimodular);
        assert!((g.eval(&[c(0.5, 0.0)]) - c(1.0, 0.0)).norm() == 0.0);
    }
}
