//! Integration against planar Lebesgue measure on products of unit discs.
//!
//! Each factor disc gets a radial Gauss rule that absorbs a boundary factor
//! (1-r^2)^a into its weights (so integrands stay bounded at the nodes) and
//! an angular rule that is either a uniform periodic grid or a graded set of
//! Gauss-Legendre bands concentrating near a kernel peak. Error estimates
//! come from comparing two nested refinement levels. All reductions are a
//! fixed-shape pairwise tree over a fixed node order, so results are
//! bit-identical across thread counts.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use once_cell::sync::Lazy;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::{pairwise_sum, pairwise_sum_c};
use crate::C64;

/// Absolute error floor: below this the two-level difference is noise.
pub const ABS_ERROR_FLOOR: f64 = 1e-12;

/// Radial node count is never raised beyond this multiple of the base rule.
pub const RADIAL_CAP_FACTOR: usize = 8;

/// Hard cap on tensor-product size per evaluation (memory/runtime guard).
const MAX_TENSOR_NODES: usize = 1 << 26;

const CHUNK: usize = 4096;

// ---------------------------------------------------------------------------
// Gauss rules (Golub-Welsch), cached per (n, exponent)
// ---------------------------------------------------------------------------

struct GaussRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

static GAUSS_CACHE: Lazy<Mutex<HashMap<(usize, u64), Arc<GaussRule>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// n-point rule for int_{-1}^{1} g(x) (1-x)^a dx, a > -1.
fn gauss_jacobi(n: usize, a: f64) -> Result<Arc<GaussRule>> {
    if n == 0 {
        return Err(Error::InvalidInput("quadrature rule needs >= 1 node".into()));
    }
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("Jacobi exponent {a} must be > -1")));
    }
    let key = (n, a.to_bits());
    if let Some(rule) = GAUSS_CACHE.lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }

    // Jacobi matrix for the (a, 0) weight: diagonal d_k, off-diagonal e_k.
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 0)] = -a / (a + 2.0);
    for k in 1..n {
        let kf = k as f64;
        m[(k, k)] = -a * a / ((2.0 * kf + a) * (2.0 * kf + a + 2.0));
        let num = 4.0 * kf * kf * (kf + a) * (kf + a);
        let den =
            (2.0 * kf + a).powi(2) * (2.0 * kf + a + 1.0) * (2.0 * kf + a - 1.0);
        let e = (num / den).sqrt();
        m[(k, k - 1)] = e;
        m[(k - 1, k)] = e;
    }
    let eig = m.symmetric_eigen();
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let rule = Arc::new(GaussRule {
        x: pairs.iter().map(|p| p.0).collect(),
        w: pairs.iter().map(|p| p.1).collect(),
    });
    GAUSS_CACHE.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// n-point rule for int_0^1 h(r) (1-r^2)^a r dr: nodes in (0,1), weights
/// carrying both the boundary factor and the r dr Jacobian.
pub(crate) fn radial_rule(n: usize, a: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    // u = r^2 maps the integral to 2^{-(a+2)} int_{-1}^1 h(sqrt((x+1)/2)) (1-x)^a dx
    let gj = gauss_jacobi(n, a)?;
    let scale = 2f64.powf(-(a + 2.0));
    let r = gj.x.iter().map(|x| ((x + 1.0) / 2.0).sqrt()).collect();
    let w = gj.w.iter().map(|w| scale * w).collect();
    Ok((r, w))
}

// ---------------------------------------------------------------------------
// Disc rules
// ---------------------------------------------------------------------------

/// Angular concentration request: grade the angular grid around `angle`
/// down to bands of width comparable to `width`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularPeak {
    pub angle: f64,
    pub width: f64,
}

/// One factor disc: radial Gauss-Jacobi x angular (uniform or graded).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscRule {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Boundary factor (1-r^2)^a absorbed into the radial weights.
    pub jacobi_exponent: f64,
    /// Angular concentrations to grade toward; empty means uniform. An
    /// integrand can carry several (a kernel singularity plus a probe pole),
    /// and the graded grid refines toward each of them.
    pub peaks: Vec<AngularPeak>,
}

impl DiscRule {
    pub fn new(radial_nodes: usize, angular_nodes: usize) -> Self {
        DiscRule { radial_nodes, angular_nodes, jacobi_exponent: 0.0, peaks: Vec::new() }
    }
}

/// Materialized per-factor grid. Complex nodes are r * u with u on the unit
/// circle; the full weight of node (i, j) is rw[i] * uw[j].
struct FactorGrid {
    r: Vec<f64>,
    rw: Vec<f64>,
    u: Vec<C64>,
    uw: Vec<f64>,
}

impl FactorGrid {
    fn len(&self) -> usize {
        self.r.len() * self.u.len()
    }
}

fn angular_uniform(m: usize) -> (Vec<C64>, Vec<f64>) {
    let w = 2.0 * std::f64::consts::PI / m as f64;
    let u = (0..m)
        .map(|j| {
            let th = -std::f64::consts::PI + w * j as f64;
            C64::new(th.cos(), th.sin())
        })
        .collect();
    (u, vec![w; m])
}

/// Dyadic bands around each peak angle, Gauss-Legendre inside each band.
/// A single peak tiles [angle - pi, angle + pi) exactly; several peaks tile
/// the circle with bands that halve toward every peak and meet midway
/// between neighbors.
fn angular_graded(peaks: &[AngularPeak], per_band: usize) -> Result<(Vec<C64>, Vec<f64>)> {
    let pi = std::f64::consts::PI;
    let gl = gauss_jacobi(per_band, 0.0)?;

    let spans: Vec<(f64, f64)> = if peaks.len() == 1 {
        let peak = peaks[0];
        let width = peak.width.clamp(1e-12, pi);
        let levels = ((pi / width).log2().ceil() as usize).max(1);
        // band edges as offsets from the peak angle, ascending from -pi to pi
        let mut edges = Vec::with_capacity(2 * levels + 2);
        edges.push(-pi);
        for l in 1..=levels {
            edges.push(-pi * 2f64.powi(-(l as i32)));
        }
        for l in (1..=levels).rev() {
            edges.push(pi * 2f64.powi(-(l as i32)));
        }
        edges.push(pi);
        edges
            .windows(2)
            .map(|pair| (peak.angle + pair[0], peak.angle + pair[1]))
            .collect()
    } else {
        multi_peak_spans(peaks)
    };

    let mut u = Vec::with_capacity(per_band * spans.len());
    let mut uw = Vec::with_capacity(per_band * spans.len());
    for (lo, hi) in spans {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in gl.x.iter().zip(&gl.w) {
            let th = mid + half * x;
            u.push(C64::new(th.cos(), th.sin()));
            uw.push(half * w);
        }
    }
    Ok((u, uw))
}

/// Circle subdivision for two or more peaks: between each pair of adjacent
/// peak angles, edges grow dyadically away from both ends (starting at each
/// peak's own width) and meet at the arc midpoint. Deterministic in the
/// input list: peaks are sorted by normalized angle first.
fn multi_peak_spans(peaks: &[AngularPeak]) -> Vec<(f64, f64)> {
    let pi = std::f64::consts::PI;
    let tau = 2.0 * pi;
    let mut ps: Vec<(f64, f64)> = peaks
        .iter()
        .map(|p| (p.angle.rem_euclid(tau), p.width.clamp(1e-12, pi)))
        .collect();
    ps.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    // coincident peaks: keep the narrower width
    ps.dedup_by(|later, kept| {
        if (later.0 - kept.0).abs() < 1e-12 {
            kept.1 = kept.1.min(later.1);
            true
        } else {
            false
        }
    });

    let m = ps.len();
    let mut edges: Vec<f64> = Vec::new();
    for i in 0..m {
        let (a0, w0) = ps[i];
        let (a1, w1) = ps[(i + 1) % m];
        let gap = {
            let g = (a1 - a0).rem_euclid(tau);
            if g <= 1e-12 { tau } else { g }
        };
        let mid = 0.5 * gap;
        edges.push(a0);
        let mut off = w0.min(mid);
        while off < mid {
            edges.push(a0 + off);
            off *= 2.0;
        }
        edges.push(a0 + mid);
        off = w1.min(mid);
        while off < mid {
            edges.push(a0 + gap - off);
            off *= 2.0;
        }
    }

    let mut sorted: Vec<f64> = edges.into_iter().map(|e| e.rem_euclid(tau)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    let mut spans = Vec::with_capacity(sorted.len());
    for i in 0..sorted.len() {
        let lo = sorted[i];
        let hi = if i + 1 < sorted.len() { sorted[i + 1] } else { sorted[0] + tau };
        if hi - lo > 1e-10 {
            spans.push((lo, hi));
        }
    }
    spans
}

fn factor_grid(rule: &DiscRule, level: usize) -> Result<FactorGrid> {
    let radial_n = rule
        .radial_nodes
        .saturating_mul(1 << level.min(63))
        .min(rule.radial_nodes * RADIAL_CAP_FACTOR)
        .max(1);
    let (r, rw) = radial_rule(radial_n, rule.jacobi_exponent)?;
    let (u, uw) = if rule.peaks.is_empty() {
        angular_uniform((rule.angular_nodes << level).max(4))
    } else {
        let per_band = ((rule.angular_nodes / 16).max(8)) << level;
        angular_graded(&rule.peaks, per_band)?
    };
    Ok(FactorGrid { r, rw, u, uw })
}

// ---------------------------------------------------------------------------
// Scheme and tensor integration
// ---------------------------------------------------------------------------

/// Tensor-product cubature over U^n with nested-refinement error control.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    pub rules: Vec<DiscRule>,
    pub target_rel_tol: f64,
    pub max_refinement: usize,
}

impl QuadratureScheme {
    pub fn new_uniform(dim: usize, radial_nodes: usize, angular_nodes: usize) -> Self {
        QuadratureScheme {
            rules: vec![DiscRule::new(radial_nodes, angular_nodes); dim],
            target_rel_tol: 1e-6,
            max_refinement: 4,
        }
    }

    /// Per-factor boundary exponents baked into the scheme's measure.
    pub fn with_jacobi(
        dim: usize,
        radial_nodes: usize,
        angular_nodes: usize,
        a: &[f64],
    ) -> Result<Self> {
        if a.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: a.len() });
        }
        let mut s = QuadratureScheme::new_uniform(dim, radial_nodes, angular_nodes);
        for (rule, aj) in s.rules.iter_mut().zip(a) {
            if !(*aj > -1.0) {
                return Err(Error::Domain(format!("Jacobi exponent {aj} must be > -1")));
            }
            rule.jacobi_exponent = *aj;
        }
        Ok(s)
    }

    /// Node counts sized for the ambient dimension (tensor cost grows fast).
    pub fn default_for_dim(dim: usize) -> Self {
        if dim <= 1 {
            QuadratureScheme::new_uniform(1, 64, 256)
        } else {
            QuadratureScheme::new_uniform(dim, 32, 64)
        }
    }

    pub fn dim(&self) -> usize {
        self.rules.len()
    }

    pub fn targeting(mut self, rel_tol: f64, max_refinement: usize) -> Self {
        self.target_rel_tol = rel_tol;
        self.max_refinement = max_refinement;
        self
    }
}

/// One cubature outcome. `est_error` is the two-level difference; when
/// `converged` is false the estimate exceeded the relative target at the
/// deepest refinement.
#[derive(Clone, Copy, Debug)]
pub struct Quad {
    pub value: C64,
    pub est_error: f64,
    pub converged: bool,
    pub levels_used: usize,
}

impl Quad {
    pub fn rel_error(&self) -> f64 {
        let scale = self.value.norm().max(ABS_ERROR_FLOOR);
        self.est_error / scale
    }

    /// Promote a non-converged result to a hard error (CLI strict mode).
    pub fn strict(self, rel_tol: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                value: self.value.norm(),
                est_error: self.est_error,
                rel_tol,
            })
        }
    }
}

fn eval_level<F>(scheme: &QuadratureScheme, level: usize, f: &F) -> Result<C64>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    let grids: Vec<FactorGrid> = scheme
        .rules
        .iter()
        .map(|rule| factor_grid(rule, level))
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = grids.iter().map(FactorGrid::len).collect();
    let total: usize = sizes.iter().try_fold(1usize, |acc, s| {
        acc.checked_mul(*s).filter(|t| *t <= MAX_TENSOR_NODES)
    })
    .ok_or_else(|| Error::InvalidInput("tensor scheme exceeds node budget".into()))?;

    let n = grids.len();
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<C64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut z = vec![C64::new(0.0, 0.0); n];
            let mut vals = Vec::with_capacity(hi - lo);
            for flat in lo..hi {
                let mut idx = flat;
                let mut wt = 1.0f64;
                for j in (0..n).rev() {
                    let g = &grids[j];
                    let k = idx % sizes[j];
                    idx /= sizes[j];
                    let (ir, iu) = (k / g.u.len(), k % g.u.len());
                    z[j] = g.r[ir] * g.u[iu];
                    wt *= g.rw[ir] * g.uw[iu];
                }
                vals.push(f(&z) * wt);
            }
            pairwise_sum_c(&vals)
        })
        .collect();
    Ok(pairwise_sum_c(&partial))
}

/// Tensor cubature of `f` against the scheme's measure
/// prod_j (1 - |z_j|^2)^{a_j} dm_2(z_j), with nested refinement until the
/// two-level difference meets `target_rel_tol` (or the refinement budget
/// runs out, reported via `converged = false`).
pub fn integrate<F>(scheme: &QuadratureScheme, f: F) -> Result<Quad>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    if scheme.rules.is_empty() {
        return Err(Error::InvalidInput("scheme has no factors".into()));
    }
    if !(scheme.target_rel_tol > 0.0) {
        return Err(Error::InvalidInput("target_rel_tol must be positive".into()));
    }
    let max_level = scheme.max_refinement.max(1);
    let mut prev = eval_level(scheme, 0, &f)?;
    let mut last_est = f64::INFINITY;
    for level in 1..=max_level {
        let cur = eval_level(scheme, level, &f)?;
        let est = (cur - prev).norm();
        if est <= scheme.target_rel_tol * cur.norm() || est <= ABS_ERROR_FLOOR {
            return Ok(Quad { value: cur, est_error: est, converged: true, levels_used: level });
        }
        prev = cur;
        last_est = est;
    }
    Ok(Quad {
        value: prev,
        est_error: last_est,
        converged: false,
        levels_used: max_level,
    })
}

// ---------------------------------------------------------------------------
// Kernel integration
// ---------------------------------------------------------------------------

/// Which reading of the reproducing-type kernel to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelForm {
    /// prod_j |1 - z_j conj(zeta_j)|^{-b_j} (real, for modulus bounds).
    Modulus,
    /// prod_j (1 - zeta_j conj(z_j))^{-b_j} (complex, principal branch;
    /// well-defined since Re(1 - zeta conj(z)) > 0 on U x U).
    Holomorphic,
}

/// Integrates prod_j (1-|zeta_j|^2)^{a_j} K_j(zeta_j; z_j, b_j) * extra(zeta)
/// over U^n, grading the angular grid toward arg z_j on factors where the
/// kernel peak is near the boundary.
///
/// The exponents `a` are added on top of any Jacobi exponents already in the
/// scheme, so callers can fold a radial weight and the kernel factor
/// separately.
pub fn integrate_kernel<F>(
    scheme: &QuadratureScheme,
    a: &[f64],
    b: &[f64],
    z: &[C64],
    form: KernelForm,
    extra: F,
) -> Result<Quad>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    let n = scheme.dim();
    if a.len() != n || b.len() != n || z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.len().min(b.len()).min(z.len()) });
    }
    let mut derived = scheme.clone();
    for (j, rule) in derived.rules.iter_mut().enumerate() {
        let total_a = rule.jacobi_exponent + a[j];
        if !(total_a > -1.0) {
            return Err(Error::Domain(format!(
                "combined boundary exponent {total_a} on factor {j} must be > -1"
            )));
        }
        rule.jacobi_exponent = total_a;
        let dist = 1.0 - z[j].norm();
        if !(dist > 0.0) {
            return Err(Error::Domain(format!("kernel point z_{j} must be interior")));
        }
        if dist < 0.3 {
            // add to (never replace) concentrations the caller registered,
            // e.g. a probe pole at another angle
            rule.peaks.push(AngularPeak { angle: z[j].arg(), width: dist });
        }
    }
    let zc: Vec<C64> = z.iter().map(|zj| zj.conj()).collect();
    let bv = b.to_vec();
    integrate(&derived, move |zeta: &[C64]| {
        let mut k = C64::new(1.0, 0.0);
        for j in 0..zeta.len() {
            let w = C64::new(1.0, 0.0) - zeta[j] * zc[j];
            match form {
                KernelForm::Modulus => {
                    k *= w.norm_sqr().powf(-0.5 * bv[j]);
                }
                KernelForm::Holomorphic => {
                    k *= w.powf(-bv[j]);
                }
            }
        }
        k * extra(zeta)
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo cross-check
// ---------------------------------------------------------------------------

/// Plain Monte Carlo for int_{U^n} f dm_{2n}: uniform rejection sampling on
/// each factor disc, one counter-indexed generator stream per sample, so the
/// result is reproducible for a fixed seed regardless of thread count.
/// Returns (value, standard error).
pub fn mc_integrate<F>(
    dim: usize,
    f: F,
    n_samples: usize,
    seed: u64,
) -> Result<(C64, f64)>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "need >= 1000 samples, got {n_samples}"
        )));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<(C64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n_samples);
            let mut vals = Vec::with_capacity(hi - lo);
            let mut z = vec![C64::new(0.0, 0.0); dim];
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                for zj in z.iter_mut() {
                    loop {
                        let x: f64 = rng.random_range(-1.0..1.0);
                        let y: f64 = rng.random_range(-1.0..1.0);
                        if x * x + y * y < 1.0 {
                            *zj = C64::new(x, y);
                            break;
                        }
                    }
                }
                vals.push(f(&z));
            }
            let sum = pairwise_sum_c(&vals);
            let sq: Vec<f64> = vals.iter().map(|v| v.norm_sqr()).collect();
            (sum, pairwise_sum(&sq))
        })
        .collect();
    let sums: Vec<C64> = partial.iter().map(|p| p.0).collect();
    let sqs: Vec<f64> = partial.iter().map(|p| p.1).collect();
    let mean = pairwise_sum_c(&sums) / n_samples as f64;
    let mean_sq = pairwise_sum(&sqs) / n_samples as f64;
    let var = (mean_sq - mean.norm_sqr()).max(0.0);
    let vol = std::f64::consts::PI.powi(dim as i32);
    Ok((vol * mean, vol * (var / n_samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::disc_moment;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn one(_: &[C64]) -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn radial_rule_weight_sum() {
        // a = 0: int_0^1 r dr = 1/2
        let (_, w) = radial_rule(16, 0.0).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 0.5, max_relative = 1e-14);
        // a = 0.5: int_0^1 (1-r^2)^{1/2} r dr = 1/3
        let (_, w) = radial_rule(16, 0.5).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0 / 3.0, max_relative = 1e-13);
        // singular side a = -0.5: value 1
        let (_, w) = radial_rule(16, -0.5).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn radial_rule_moments() {
        // int_0^1 r^{2k} (1-r^2)^a r dr = disc_moment(a, k) / (2 pi angular)
        for &a in &[0.0, 1.5, -0.5] {
            let (r, w) = radial_rule(24, a).unwrap();
            for k in [0usize, 1, 3, 7] {
                let got: f64 = r
                    .iter()
                    .zip(&w)
                    .map(|(ri, wi)| wi * ri.powi(2 * k as i32))
                    .sum();
                let want = disc_moment(a, k) / (2.0 * PI);
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn disc_area_and_beta_integral() {
        let s = QuadratureScheme::new_uniform(1, 16, 32);
        let q = integrate(&s, one).unwrap();
        assert!(q.converged);
        assert_relative_eq!(q.value.re, PI, max_relative = 1e-12);
        assert!(q.value.im.abs() < 1e-14);

        // (1-|z|^2)^{1/2} via scheme-level Jacobi absorption
        let s = QuadratureScheme::with_jacobi(1, 16, 32, &[0.5]).unwrap();
        let q = integrate(&s, one).unwrap();
        assert_relative_eq!(q.value.re, PI / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let s = QuadratureScheme::new_uniform(1, 16, 32);
        let q = integrate(&s, |z| z[0]).unwrap();
        assert!(q.value.norm() < 1e-12);
        assert!(q.converged);
    }

    #[test]
    fn product_moment_two_factors() {
        let s = QuadratureScheme::new_uniform(2, 12, 24);
        let q = integrate(&s, |z| {
            C64::new(z[0].norm_sqr() * z[1].norm_sqr(), 0.0)
        })
        .unwrap();
        assert_relative_eq!(q.value.re, (PI / 2.0) * (PI / 2.0), max_relative = 1e-11);
    }

    #[test]
    fn monomial_orthogonality_grid() {
        // int z^k conj(z)^l (1-|z|^2)^a dm = delta_{kl} * disc_moment(a, k)
        for &a in &[0.0, 0.5, -0.5] {
            let s = QuadratureScheme::with_jacobi(1, 16, 32, &[a]).unwrap();
            for k in 0..=6usize {
                for l in 0..=6usize {
                    let q = integrate(&s, |z| {
                        z[0].powu(k as u32) * z[0].conj().powu(l as u32)
                    })
                    .unwrap();
                    if k == l {
                        assert_relative_eq!(
                            q.value.re,
                            disc_moment(a, k),
                            max_relative = 1e-11
                        );
                    } else {
                        assert!(
                            q.value.norm() < 1e-12,
                            "k={k} l={l} a={a}: {}",
                            q.value.norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_reproduces_area_at_any_z() {
        // holomorphic kernel, a=0, b=2: only the constant mode survives -> pi
        let s = QuadratureScheme::new_uniform(1, 32, 64);
        for z in [C64::new(0.0, 0.0), C64::new(0.5, 0.3), C64::new(-0.2, 0.85)] {
            let q = integrate_kernel(&s, &[0.0], &[2.0], &[z], KernelForm::Holomorphic, one)
                .unwrap();
            assert_relative_eq!(q.value.re, PI, max_relative = 1e-9);
            assert!(q.value.im.abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_modulus_at_origin_is_beta_integral() {
        let s = QuadratureScheme::new_uniform(1, 16, 32);
        let q = integrate_kernel(
            &s,
            &[1.5],
            &[4.0],
            &[C64::new(0.0, 0.0)],
            KernelForm::Modulus,
            one,
        )
        .unwrap();
        assert_relative_eq!(q.value.re, disc_moment(1.5, 0), max_relative = 1e-12);
    }

    #[test]
    fn graded_grid_handles_near_boundary_kernel() {
        // int |1 - z conj(zeta)|^{-4} dm(zeta) = pi sum (j+1)^2 |z|^{2j} B(j+1,1)
        //                                      = pi sum (j+1) |z|^{2j} = pi / (1-|z|^2)^2
        let s = QuadratureScheme::new_uniform(1, 64, 256);
        let z = C64::from_polar(0.97, 1.1);
        let q = integrate_kernel(&s, &[0.0], &[4.0], &[z], KernelForm::Modulus, one).unwrap();
        let want = PI / (1.0 - z.norm_sqr()).powi(2);
        assert!(q.converged, "est rel err {}", q.rel_error());
        assert_relative_eq!(q.value.re, want, max_relative = 1e-6);
    }

    #[test]
    fn multi_peak_bands_tile_the_circle() {
        let cases: Vec<Vec<AngularPeak>> = vec![
            vec![AngularPeak { angle: 0.7, width: 0.01 }],
            vec![
                AngularPeak { angle: 0.0, width: 0.01 },
                AngularPeak { angle: 2.1, width: 0.15 },
            ],
            vec![
                AngularPeak { angle: -3.0, width: 0.05 },
                AngularPeak { angle: 3.0, width: 0.02 }, // nearly adjacent across the wrap
                AngularPeak { angle: 1.0, width: 0.2 },
            ],
            vec![
                AngularPeak { angle: 0.5, width: 0.01 },
                AngularPeak { angle: 0.5, width: 0.1 }, // coincident, widths merge
            ],
        ];
        for peaks in cases {
            let (u, uw) = angular_graded(&peaks, 8).unwrap();
            let total: f64 = uw.iter().sum();
            assert_relative_eq!(total, 2.0 * PI, max_relative = 1e-12);
            for v in u {
                assert_relative_eq!(v.norm(), 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn two_peak_grid_resolves_two_boundary_kernels() {
        // each term obeys int |1 - z conj(zeta)|^{-4} dm = pi / (1-|z|^2)^2
        let za = C64::from_polar(0.98, 0.0);
        let zb = C64::from_polar(0.97, 2.1);
        let f = move |zeta: &[C64]| {
            let a = (C64::new(1.0, 0.0) - za * zeta[0].conj()).norm_sqr().powi(-2);
            let b = (C64::new(1.0, 0.0) - zb * zeta[0].conj()).norm_sqr().powi(-2);
            C64::new(a + b, 0.0)
        };
        let want = PI / (1.0 - za.norm_sqr()).powi(2) + PI / (1.0 - zb.norm_sqr()).powi(2);

        let mut uniform = QuadratureScheme::new_uniform(1, 64, 256).targeting(1e-10, 2);
        let q_uniform = integrate(&uniform, f).unwrap();
        let err_uniform = (q_uniform.value.re - want).abs() / want;

        uniform.rules[0].peaks = vec![
            AngularPeak { angle: 0.0, width: 1.0 - za.norm() },
            AngularPeak { angle: 2.1, width: 1.0 - zb.norm() },
        ];
        let q_graded = integrate(&uniform, f).unwrap();
        let err_graded = (q_graded.value.re - want).abs() / want;

        assert!(err_graded < 1e-8, "graded rel err {err_graded}");
        assert!(
            err_graded < err_uniform / 100.0,
            "graded {err_graded} vs uniform {err_uniform}"
        );
    }

    #[test]
    fn refinement_shrinks_error_for_peaked_kernel() {
        let z = C64::from_polar(0.99, -0.4);
        let ests: Vec<f64> = (1..=3usize)
            .map(|mr| {
                let s = QuadratureScheme::new_uniform(1, 48, 192)
                    .targeting(1e-14, mr);
                let q = integrate_kernel(&s, &[1.0], &[4.0], &[z], KernelForm::Modulus, one)
                    .unwrap();
                q.est_error
            })
            .collect();
        assert!(ests[1] <= ests[0] * 1.001, "{ests:?}");
        assert!(ests[2] <= ests[1] * 1.001, "{ests:?}");
    }

    #[test]
    fn mc_constant_is_exact() {
        let (v, se) = mc_integrate(2, |_| C64::new(1.0, 0.0), 2000, 7).unwrap();
        assert_relative_eq!(v.re, PI * PI, max_relative = 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn mc_matches_beta_integral() {
        let (v, se) = mc_integrate(
            1,
            |z| C64::new(1.0 - z[0].norm_sqr(), 0.0),
            200_000,
            42,
        )
        .unwrap();
        assert!((v.re - PI / 2.0).abs() < 3.0 * se, "{} vs {} (se {se})", v.re, PI / 2.0);
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let f = |z: &[C64]| z[0] * z[0].conj() + C64::new(0.25, 0.1);
        let (v1, s1) = mc_integrate(1, f, 5000, 123).unwrap();
        let (v2, s2) = mc_integrate(1, f, 5000, 123).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(s1, s2);
        let (v3, _) = mc_integrate(1, f, 5000, 124).unwrap();
        assert_ne!(v1, v3);
    }

    #[test]
    fn tensor_and_mc_agree_on_smooth_integrand() {
        let f = |z: &[C64]| {
            let w = z[0] + C64::new(0.3, -0.2) * z[0] * z[0];
            w * w.conj() // |w|^2, smooth and positive
        };
        let s = QuadratureScheme::new_uniform(1, 24, 48);
        let q = integrate(&s, f).unwrap();
        let (v, se) = mc_integrate(1, f, 400_000, 99).unwrap();
        let tol = 3.0 * (se * se + q.est_error * q.est_error).sqrt();
        assert!((q.value - v).norm() <= tol.max(1e-9));
    }

    #[test]
    fn non_convergence_is_reported_not_hidden() {
        // brutal kernel with a tiny refinement budget: must come back
        // converged=false and strict() must turn it into an error
        let s = QuadratureScheme::new_uniform(1, 4, 8).targeting(1e-13, 1);
        let z = C64::from_polar(0.995, 0.0);
        let q = integrate_kernel(&s, &[0.0], &[4.0], &[z], KernelForm::Modulus, one).unwrap();
        assert!(!q.converged);
        assert!(q.strict(1e-13).is_err());
    }
}
