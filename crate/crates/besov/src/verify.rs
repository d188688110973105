//! The experiment harness: dichotomy runs over the operator targets and the
//! structural checks, assembled into [`VerificationReport`]s.
//!
//! Operator targets pair each probe input f with a symbol g (by default the
//! phase-cancelling symbol of f itself, the adversarial choice) and compare
//! the output norm against the input norm:
//!
//!   T1, T2, T3 - Hankel-type operator, p < 1, p = 1, p > 1; output measured
//!                in the conjugate-space norm,
//!   T4, T5, T6 - Berezin-type transform, p < 1, p > 1, p = 1; output
//!                measured in the weighted L_p norm.
//!
//! Sufficiency runs sweep a fixed probe family and pass when the ratio
//! sequence stabilizes; necessity runs sweep the extremal family toward the
//! boundary and pass when divergence is detected. The two modes partition
//! parameter space under the chosen threshold preset: each rejects the other
//! mode's parameters.
//!
//! Structural targets: L1 (pointwise bound through the derivative kernel),
//! L2 (kernel-moment ratio boundedness), P1 (dyadic cell comparability).

use std::sync::{Arc, Mutex};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SymbolSpec, ThresholdPreset};
use crate::error::{Error, Result};
use crate::holocalc::{
    required_degree, FracOrder, MultiIndex, PhaseConvention, PolySeries, Symbol,
    EXTREMAL_TAIL_REL,
};
use crate::operators::berezin_prefactor;
use crate::partition::{build_partition, check_proposition1, covering_multiplicity};
use crate::quadrature::{integrate_kernel, AngularPeak, KernelForm, QuadratureScheme};
use crate::report::{Mode, QuadSummary, ReproBlock, Verdict, VerificationReport};
use crate::spaces::{lemma1_ratio, norm_integral, NormResult, SpaceParams};
use crate::stats::{linear_fit, proportional_fit, spearman};
use crate::weights::{lemma2_ratio, ProductWeight};
use crate::C64;

/// Pearson floor for the boundary-case logarithmic fit (policy constant,
/// echoed into reports).
const LOG_FIT_PEARSON_MIN: f64 = 0.9;

/// Growth factor separating "bounded" from "blowing up" in the L1 check.
const L1_GROWTH_TOL: f64 = 10.0;

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    L1,
    L2,
    P1,
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorFamily {
    Hankel,
    Berezin,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(Target::L1),
            "L2" => Ok(Target::L2),
            "P1" => Ok(Target::P1),
            "T1" => Ok(Target::T1),
            "T2" => Ok(Target::T2),
            "T3" => Ok(Target::T3),
            "T4" => Ok(Target::T4),
            "T5" => Ok(Target::T5),
            "T6" => Ok(Target::T6),
            other => Err(Error::InvalidInput(format!(
                "unknown target {other:?}; expected one of L1, L2, P1, T1..T6"
            ))),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Target::L1 => "L1",
            Target::L2 => "L2",
            Target::P1 => "P1",
            Target::T1 => "T1",
            Target::T2 => "T2",
            Target::T3 => "T3",
            Target::T4 => "T4",
            Target::T5 => "T5",
            Target::T6 => "T6",
        };
        f.write_str(s)
    }
}

impl Target {
    pub fn all() -> [Target; 9] {
        [
            Target::L1,
            Target::L2,
            Target::P1,
            Target::T1,
            Target::T2,
            Target::T3,
            Target::T4,
            Target::T5,
            Target::T6,
        ]
    }

    pub fn operator_family(self) -> Option<OperatorFamily> {
        match self {
            Target::T1 | Target::T2 | Target::T3 => Some(OperatorFamily::Hankel),
            Target::T4 | Target::T5 | Target::T6 => Some(OperatorFamily::Berezin),
            _ => None,
        }
    }

    /// Each operator target is tied to an integrability regime.
    pub fn check_p(self, p: f64) -> Result<()> {
        let ok = match self {
            Target::T1 | Target::T4 => p < 1.0,
            Target::T2 | Target::T6 => (p - 1.0).abs() < 1e-12,
            Target::T3 | Target::T5 => p > 1.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            let want = match self {
                Target::T1 | Target::T4 => "p < 1",
                Target::T2 | Target::T6 => "p = 1",
                _ => "p > 1",
            };
            Err(Error::InvalidInput(format!("target {self} requires {want}, got p = {p}")))
        }
    }

    pub fn default_preset(self) -> ThresholdPreset {
        match self {
            Target::T2 => ThresholdPreset::T2Statement,
            Target::T3 | Target::T6 => ThresholdPreset::Plain,
            _ => ThresholdPreset::T1Style,
        }
    }
}

/// Resolved index-condition context for an operator run.
#[derive(Clone, Debug)]
pub struct TargetContext {
    pub family: OperatorFamily,
    pub preset: ThresholdPreset,
    pub alpha: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Factors j with alpha_j <= threshold_j.
    pub violated: Vec<usize>,
}

impl TargetContext {
    pub fn satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}

pub fn target_context(target: Target, cfg: &ExperimentConfig) -> Result<TargetContext> {
    let family = target.operator_family().ok_or_else(|| {
        Error::InvalidInput(format!("target {target} is not an operator target"))
    })?;
    target.check_p(cfg.p)?;
    let w = cfg.product_weight()?;
    let alpha = cfg.alpha_vec()?;
    let preset = cfg.threshold_preset.unwrap_or_else(|| target.default_preset());
    let mut thresholds = Vec::with_capacity(cfg.n);
    let mut violated = Vec::new();
    for j in 0..cfg.n {
        let (a_w, _) = w.factor(j).regularity_indices()?;
        let thr = preset.threshold(a_w, cfg.p);
        if !(alpha[j] > thr) {
            violated.push(j);
        }
        thresholds.push(thr);
    }
    Ok(TargetContext { family, preset, alpha, thresholds, violated })
}

// ---------------------------------------------------------------------------
// Probe inputs
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum ProbeKind {
    Series { f: Arc<PolySeries>, df: Arc<PolySeries> },
    /// Closed-form pole family C_r prod (1 - r_j z_j)^{-k_j}; evaluation
    /// needs no truncation.
    Extremal { r: Vec<f64>, k: Vec<usize>, c_r: f64 },
}

/// One probe input: a holomorphic function with its derivative, evaluable
/// anywhere on the open polydisc.
#[derive(Clone)]
pub struct Probe {
    label: String,
    kind: ProbeKind,
}

impl Probe {
    pub fn from_series(label: impl Into<String>, f: PolySeries) -> Result<Self> {
        let df = f.frac_diff(&FracOrder::ones(f.dim()))?;
        Ok(Probe { label: label.into(), kind: ProbeKind::Series { f: Arc::new(f), df: Arc::new(df) } })
    }

    /// The extremal family member at radius vector r with pole orders k:
    /// normalization C_r = prod (1-r_j)^{k_j} w_j(1-r_j)^{-1/p}.
    pub fn extremal(w: &ProductWeight, p: f64, r: &[f64], k: &[usize]) -> Result<Self> {
        let n = w.dim();
        if r.len() != n || k.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.len().min(k.len()) });
        }
        let mut c_r = 1.0;
        for j in 0..n {
            if !(r[j] >= 0.0 && r[j] < 1.0) {
                return Err(Error::Domain(format!("extremal radius {} outside [0,1)", r[j])));
            }
            let (a_w, _) = w.factor(j).regularity_indices()?;
            if !(k[j] as f64 > (a_w + 2.0) / p) {
                return Err(Error::Constraint(format!(
                    "pole order k_{j} = {} must exceed (a_w + 2)/p = {}",
                    k[j],
                    (a_w + 2.0) / p
                )));
            }
            c_r *= (1.0 - r[j]).powi(k[j] as i32)
                * w.factor(j).eval_closure(1.0 - r[j]).powf(-1.0 / p);
        }
        let label = format!("extremal:{}", r[0]);
        Ok(Probe { label, kind: ProbeKind::Extremal { r: r.to_vec(), k: k.to_vec(), c_r } })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval_f(&self, z: &[C64]) -> C64 {
        match &self.kind {
            ProbeKind::Series { f, .. } => f.eval_unchecked(z),
            ProbeKind::Extremal { r, k, c_r } => {
                let mut v = C64::new(*c_r, 0.0);
                for j in 0..r.len() {
                    v *= (C64::new(1.0, 0.0) - r[j] * z[j]).powu(k[j] as u32).finv();
                }
                v
            }
        }
    }

    /// D f, where D multiplies the coefficient of z^k by prod (k_j + 1);
    /// per factor this is d/dz_j (z_j * ).
    pub fn eval_df(&self, z: &[C64]) -> C64 {
        match &self.kind {
            ProbeKind::Series { df, .. } => df.eval_unchecked(z),
            ProbeKind::Extremal { r, k, c_r } => {
                let mut v = C64::new(*c_r, 0.0);
                for j in 0..r.len() {
                    let one = C64::new(1.0, 0.0);
                    let base = (one - r[j] * z[j]).powu(k[j] as u32).finv();
                    let fprime =
                        (k[j] as f64) * r[j] * (one - r[j] * z[j]).powu(k[j] as u32 + 1).finv();
                    v *= base + z[j] * fprime;
                }
                v
            }
        }
    }

    /// Clone of `scheme` with this probe's boundary concentration registered
    /// as an angular peak on every factor it concentrates on. Pole-family
    /// probes put mass in an angular window of width 1 - r_j around the
    /// positive real axis; a uniform angular grid cannot see that window
    /// once it is narrower than the node spacing, and the resulting norms
    /// are noise. Series probes are returned unchanged.
    pub fn peaked(&self, scheme: &QuadratureScheme) -> QuadratureScheme {
        let mut s = scheme.clone();
        if let ProbeKind::Extremal { r, .. } = &self.kind {
            for (rule, rj) in s.rules.iter_mut().zip(r) {
                let width = 1.0 - rj;
                if width < 0.3 {
                    rule.peaks.push(AngularPeak { angle: 0.0, width });
                }
            }
        }
        s
    }
}

impl std::fmt::Debug for Probe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Probe({})", self.label)
    }
}

/// Smallest integer pole orders admissible for the extremal family:
/// k_j = floor((a_w_j + 2)/p) + 1.
pub fn default_extremal_k(w: &ProductWeight, p: f64) -> Result<Vec<usize>> {
    (0..w.dim())
        .map(|j| {
            let (a_w, _) = w.factor(j).regularity_indices()?;
            Ok(((a_w + 2.0) / p).floor() as usize + 1)
        })
        .collect()
}

/// The pointwise product f(zeta) g(zeta) for a probe and its configured
/// symbol, fused into one closure. The default pairing (unimodular phase of
/// f itself) reduces to |f|, saving a second probe evaluation per kernel
/// node — the hot path of every operator run.
pub fn paired_integrand(
    spec: &SymbolSpec,
    probe: &Probe,
    convention: PhaseConvention,
    n: usize,
) -> Result<Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>> {
    if matches!(spec, SymbolSpec::Phase) && convention == PhaseConvention::Unimodular {
        let p = probe.clone();
        return Ok(Arc::new(move |z| C64::new(p.eval_f(z).norm(), 0.0)));
    }
    let p = probe.clone();
    let g = probe_symbol(spec, probe, convention, n)?;
    Ok(Arc::new(move |z| p.eval_f(z) * g.eval(z)))
}

/// The symbol paired with a probe under the configured choice.
pub fn probe_symbol(
    spec: &SymbolSpec,
    probe: &Probe,
    convention: PhaseConvention,
    n: usize,
) -> Result<Symbol> {
    match spec {
        SymbolSpec::Phase => {
            let p = probe.clone();
            let bound = match convention {
                PhaseConvention::Unimodular => 1.0,
                PhaseConvention::RealExp => std::f64::consts::PI.exp(),
            };
            Ok(Symbol::from_fn(format!("phase({})", probe.label()), bound, move |z| {
                let v = p.eval_f(z);
                let m = v.norm();
                if m == 0.0 {
                    return C64::new(1.0, 0.0);
                }
                match convention {
                    PhaseConvention::Unimodular => v.conj() / m,
                    PhaseConvention::RealExp => C64::new((-v.arg()).exp(), 0.0),
                }
            }))
        }
        SymbolSpec::Constant { re, im } => Ok(Symbol::constant(C64::new(*re, *im))),
        SymbolSpec::ConjMonomial { degree } => {
            if degree.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: degree.len() });
            }
            Ok(Symbol::conj_monomial(MultiIndex::new(degree.clone())))
        }
    }
}

/// Deterministic probe family: monomials, seeded random polynomials, then
/// the extremal family in ascending r — so the hardest, boundary-
/// concentrated probes land in the last quarter the stabilization rule
/// inspects.
pub fn build_probe_family(cfg: &ExperimentConfig, w: &ProductWeight) -> Result<Vec<Probe>> {
    let n = cfg.n;
    let mut probes = Vec::new();

    let mono_bound = if n == 1 { vec![8] } else { vec![2; n] };
    for k in MultiIndex::box_iter(&MultiIndex::new(mono_bound)) {
        let label = format!(
            "monomial:{}",
            k.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
        );
        probes.push(Probe::from_series(label, PolySeries::monomial(k))?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rand_bound = if n == 1 { vec![12] } else { vec![3; n] };
    let decay = 0.7f64;
    for i in 0..12 {
        let bound = MultiIndex::new(rand_bound.clone());
        let mut terms = Vec::new();
        for k in MultiIndex::box_iter(&bound) {
            let mag: f64 = rng.random_range(0.3..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let c = C64::from_polar(mag * decay.powi(k.total() as i32), phase);
            terms.push((k, c));
        }
        let f = PolySeries::from_terms(n, bound, &terms, false)?;
        probes.push(Probe::from_series(format!("random:{i:02}"), f)?);
    }

    let k = match &cfg.extremal_k {
        Some(k) => k.clone(),
        None => default_extremal_k(w, cfg.p)?,
    };
    for r in cfg.sorted_r_sweep() {
        probes.push(Probe::extremal(w, cfg.p, &vec![r; n], &k)?);
    }
    Ok(probes)
}

// ---------------------------------------------------------------------------
// Operator norm probes
// ---------------------------------------------------------------------------

/// Scheme triple for one harness run: the input-norm integral, the coarser
/// outer integral of the output norm, and the inner kernel cubature behind
/// each outer node.
#[derive(Clone, Debug)]
pub struct HarnessSchemes {
    pub in_scheme: QuadratureScheme,
    pub outer: QuadratureScheme,
    pub inner: QuadratureScheme,
}

impl HarnessSchemes {
    /// The cost of one probe is outer_nodes x inner_nodes kernel
    /// evaluations, so both derived schemes are deliberately coarse: the
    /// harness compares ratios at a fixed scheme, not absolute norms.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let q = &cfg.quadrature;
        let in_scheme = cfg.scheme();
        let outer = QuadratureScheme::new_uniform(
            cfg.n,
            (q.radial_nodes / 4).max(6),
            (q.angular_nodes / 8).max(12),
        )
        .targeting(q.target_rel_tol.max(3e-3), 1);
        let inner = QuadratureScheme::new_uniform(
            cfg.n,
            (q.radial_nodes / 2).max(8),
            (q.angular_nodes / 4).max(16),
        )
        .targeting(q.target_rel_tol.max(1e-4), 1);
        HarnessSchemes { in_scheme, outer, inner }
    }

    fn record_policy(&self, rep: &mut VerificationReport) {
        rep.policy.insert("outer_radial_nodes".into(), self.outer.rules[0].radial_nodes as f64);
        rep.policy.insert("outer_angular_nodes".into(), self.outer.rules[0].angular_nodes as f64);
        rep.policy.insert("inner_radial_nodes".into(), self.inner.rules[0].radial_nodes as f64);
        rep.policy.insert("inner_angular_nodes".into(), self.inner.rules[0].angular_nodes as f64);
    }
}

/// Input and output norms for one probe/symbol pairing.
#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub in_norm: NormResult,
    pub out_norm: NormResult,
    pub inner_quad: QuadSummary,
}

impl ProbeOutcome {
    pub fn ratio(&self) -> f64 {
        if self.in_norm.value > 0.0 {
            self.out_norm.value / self.in_norm.value
        } else {
            f64::NAN
        }
    }
}

/// ||Op(f, g)|| / ||f|| ingredients: the input measured in the derivative
/// norm, the Hankel output in the conjugate-space norm (via the multiplier
/// identity D h(z) = int (1-|zeta|^2)^alpha prod (1 + (alpha_j+1) zeta_j
/// conj(z_j)) (1 - zeta_j conj(z_j))^{-(alpha_j+3)} f g dm, one cubature per
/// outer node), the Berezin output in the weighted L_p norm.
///
/// `fg` is the fused product f(zeta) g(zeta) from [`paired_integrand`].
pub fn operator_norm_probe(
    family: OperatorFamily,
    probe: &Probe,
    fg: &(dyn Fn(&[C64]) -> C64 + Sync),
    alpha: &[f64],
    p: f64,
    w: &ProductWeight,
    schemes: &HarnessSchemes,
) -> Result<ProbeOutcome> {
    let sp_in = SpaceParams::new(p, w.clone(), probe.peaked(&schemes.in_scheme))?;
    let in_norm = norm_integral(&sp_in, p - 2.0, true, |z| probe.eval_df(z).norm())?;

    let issues = Mutex::new(QuadSummary::default());
    let sp_out = SpaceParams::new(p, w.clone(), probe.peaked(&schemes.outer))?;
    let inner = &probe.peaked(&schemes.inner);
    let out_norm = match family {
        OperatorFamily::Hankel => {
            let b: Vec<f64> = alpha.iter().map(|a| a + 3.0).collect();
            norm_integral(&sp_out, p - 2.0, true, |z| {
                let res = integrate_kernel(inner, alpha, &b, z, KernelForm::Holomorphic, |zeta| {
                    let mut kfac = C64::new(1.0, 0.0);
                    for j in 0..zeta.len() {
                        kfac *= C64::new(1.0, 0.0) + (alpha[j] + 1.0) * zeta[j] * z[j].conj();
                    }
                    fg(zeta) * kfac
                });
                match res {
                    Ok(q) => {
                        let mut s = issues.lock().unwrap();
                        s.absorb(q.rel_error(), q.converged);
                        q.value.norm()
                    }
                    Err(_) => {
                        issues.lock().unwrap().non_convergent_points += 1;
                        0.0
                    }
                }
            })?
        }
        OperatorFamily::Berezin => {
            let b: Vec<f64> = alpha.iter().map(|a| 2.0 * a + 4.0).collect();
            norm_integral(&sp_out, -2.0, true, |z| {
                let res =
                    integrate_kernel(inner, alpha, &b, z, KernelForm::Modulus, |zeta| fg(zeta));
                match res {
                    Ok(q) => {
                        let mut s = issues.lock().unwrap();
                        s.absorb(q.rel_error(), q.converged);
                        q.value.norm() * berezin_prefactor(alpha, z)
                    }
                    Err(_) => {
                        issues.lock().unwrap().non_convergent_points += 1;
                        0.0
                    }
                }
            })?
        }
    };
    Ok(ProbeOutcome { in_norm, out_norm, inner_quad: issues.into_inner().unwrap() })
}

// ---------------------------------------------------------------------------
// Predictors
// ---------------------------------------------------------------------------

/// Divergence predictor at sweep radius r: product over the violated factors
/// of (1-r)^{(alpha_j+2) p} / w_j(1-r). It tends to infinity exactly when
/// the index condition fails strictly on such a factor.
pub fn necessity_predictor(
    w: &ProductWeight,
    alpha: &[f64],
    p: f64,
    violated: &[usize],
    r: f64,
) -> f64 {
    let t = 1.0 - r;
    violated
        .iter()
        .map(|&j| t.powf((alpha[j] + 2.0) * p) / w.factor(j).eval_closure(t))
        .product()
}

/// |zeta~| from maximizing |1 - conj(z) zeta| over the discretized boundary
/// of the localization disc {|zeta - r| = (1-r)/4} with z = r; the maximum
/// sits at the inward point, modulus r - (1-r)/4.
pub fn zeta_tilde_modulus(r: f64) -> f64 {
    let rad = (1.0 - r) / 4.0;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_mod = r;
    for i in 0..256 {
        let phi = std::f64::consts::TAU * i as f64 / 256.0;
        let zeta = C64::new(r + rad * phi.cos(), rad * phi.sin());
        let v = (C64::new(1.0, 0.0) - r * zeta).norm();
        if v > best_val {
            best_val = v;
            best_mod = zeta.norm();
        }
    }
    best_mod
}

/// A violated factor sits on the boundary case when (alpha_j + 2) p equals
/// the weight's lower index exactly; there the power predictor is constant
/// and divergence is logarithmic.
fn boundary_factors(
    w: &ProductWeight,
    alpha: &[f64],
    p: f64,
    violated: &[usize],
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &j in violated {
        let (a_w, _) = w.factor(j).regularity_indices()?;
        if ((alpha[j] + 2.0) * p - a_w).abs() < 1e-12 {
            out.push(j);
        }
    }
    Ok(out)
}

fn stabilization_ratio(ratios: &[f64]) -> (f64, f64, f64) {
    let len = ratios.len();
    let tail = (len / 4).max(1);
    let split = len - tail;
    let prior = ratios[..split].iter().cloned().fold(0.0f64, f64::max);
    let last = ratios[split..].iter().cloned().fold(0.0f64, f64::max);
    let ratio = if prior > 0.0 {
        last / prior
    } else if last == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    (ratio, last, prior)
}

// ---------------------------------------------------------------------------
// Harness entry points
// ---------------------------------------------------------------------------

fn base_report(target: Target, mode: Mode, cfg: &ExperimentConfig) -> VerificationReport {
    VerificationReport::new(target.to_string(), mode, ReproBlock::new(cfg.seed, &cfg.hash_bytes()))
}

fn record_thresholds(rep: &mut VerificationReport, ctx: &TargetContext) {
    for (j, (a, t)) in ctx.alpha.iter().zip(&ctx.thresholds).enumerate() {
        rep.policy.insert(format!("alpha_{j}"), *a);
        rep.policy.insert(format!("threshold_{j}"), *t);
    }
    rep.notes.push(format!("threshold preset: {}", ctx.preset.id()));
}

/// Bounded-ratio run: parameters must satisfy the index condition; the probe
/// family is swept and the verdict is the stabilization rule.
pub fn run_sufficiency(target: Target, cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = target_context(target, cfg)?;
    if !ctx.satisfied() {
        let j = ctx.violated[0];
        return Err(Error::InvalidInput(format!(
            "sufficiency mode requires the index condition; factor {j} violates it: \
             alpha_{j} = {} <= threshold {} (preset {})",
            ctx.alpha[j],
            ctx.thresholds[j],
            ctx.preset.id()
        )));
    }
    let w = cfg.product_weight()?;
    let schemes = HarnessSchemes::from_config(cfg);
    let probes = build_probe_family(cfg, &w)?;

    let mut rep = base_report(target, Mode::Sufficiency, cfg);
    rep.hypothesis_satisfied = true;
    record_thresholds(&mut rep, &ctx);
    schemes.record_policy(&mut rep);
    rep.notes.push(format!("symbol: {}", cfg.symbol.describe()));

    let mut ratios = Vec::new();
    let mut skipped = 0usize;
    let mut regularized = false;
    for probe in &probes {
        let fg = paired_integrand(&cfg.symbol, probe, cfg.phase, cfg.n)?;
        let out =
            operator_norm_probe(ctx.family, probe, &*fg, &ctx.alpha, cfg.p, &w, &schemes)?;
        rep.quad.merge(&out.inner_quad);
        rep.quad.absorb(out.in_norm.rel_quad_error, out.in_norm.converged);
        rep.quad.absorb(out.out_norm.rel_quad_error, out.out_norm.converged);
        regularized |= out.in_norm.regularized || out.out_norm.regularized;
        if !(out.in_norm.value > 0.0) || !out.in_norm.value.is_finite() {
            skipped += 1;
            rep.notes.push(format!("probe {} skipped: zero or non-finite input norm", probe.label()));
            continue;
        }
        let ratio = out.ratio();
        rep.push_row(probe.label().to_string(), "in_norm", out.in_norm.value, out.in_norm.est_error);
        rep.push_row(probe.label().to_string(), "out_norm", out.out_norm.value, out.out_norm.est_error);
        let ratio_est = ratio
            * (out.in_norm.est_error / out.in_norm.value
                + out.out_norm.est_error / out.out_norm.value.max(f64::MIN_POSITIVE));
        rep.push_row(probe.label().to_string(), "ratio", ratio, ratio_est.abs());
        ratios.push(ratio);
    }
    if regularized {
        rep.notes.push("norm exponent clipped on at least one factor (regularized values; comparable at fixed scheme)".into());
    }
    if ratios.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "only {} usable probes; need at least 4 for the stabilization rule",
            ratios.len()
        )));
    }

    let (stab, last, prior) = stabilization_ratio(&ratios);
    let sup = ratios.iter().cloned().fold(0.0f64, f64::max);
    rep.insert_metric("sup_ratio", sup);
    rep.insert_metric("last_quarter_max", last);
    rep.insert_metric("prior_max", prior);
    rep.insert_metric("stabilization_ratio", stab);
    rep.insert_metric("probes_used", ratios.len() as f64);
    rep.insert_metric("probes_skipped", skipped as f64);
    rep.policy.insert("stabilization_factor".into(), cfg.detection.stabilization_factor);
    rep.verdict = Verdict::from_bool(stab <= cfg.detection.stabilization_factor);
    rep.rule = "pass iff max ratio over the last quarter of the probe family <= \
                stabilization_factor x max over the first three quarters"
        .into();
    Ok(rep)
}

/// Divergence run: parameters must violate the index condition; the extremal
/// family is swept toward the boundary and the verdict is slope- and
/// correlation-based (or a logarithmic fit on the boundary case).
pub fn run_necessity(target: Target, cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = target_context(target, cfg)?;
    if ctx.satisfied() {
        return Err(Error::InvalidInput(format!(
            "necessity mode requires a violated factor, but alpha_j > threshold_j on every \
             factor (preset {}): alpha = {:?}, thresholds = {:?}",
            ctx.preset.id(),
            ctx.alpha,
            ctx.thresholds
        )));
    }
    let rs = cfg.sorted_r_sweep();
    if rs.len() < 3 {
        return Err(Error::InvalidInput("necessity sweep needs at least 3 r values".into()));
    }
    let w = cfg.product_weight()?;
    let schemes = HarnessSchemes::from_config(cfg);
    let k = match &cfg.extremal_k {
        Some(k) => k.clone(),
        None => default_extremal_k(&w, cfg.p)?,
    };
    let boundary = boundary_factors(&w, &ctx.alpha, cfg.p, &ctx.violated)?;
    let boundary_case = !boundary.is_empty() && boundary.len() == ctx.violated.len();

    let mut rep = base_report(target, Mode::Necessity, cfg);
    rep.hypothesis_satisfied = false;
    record_thresholds(&mut rep, &ctx);
    schemes.record_policy(&mut rep);
    rep.notes.push(format!("symbol: {}", cfg.symbol.describe()));
    rep.notes.push(format!("extremal pole orders k = {k:?}"));
    rep.notes.push(
        "extremal probes evaluate in closed form; the reported truncation_degree is the \
         series length an expansion would need at the tail tolerance"
            .into(),
    );

    let mut used_rs = Vec::new();
    let mut ratios = Vec::new();
    let mut predictors = Vec::new();
    let mut in_norms = Vec::new();
    let mut log_terms = Vec::new();
    let mut regularized = false;
    for &r in &rs {
        let probe = Probe::extremal(&w, cfg.p, &vec![r; cfg.n], &k)?;
        let fg = paired_integrand(&cfg.symbol, &probe, cfg.phase, cfg.n)?;
        let out =
            operator_norm_probe(ctx.family, &probe, &*fg, &ctx.alpha, cfg.p, &w, &schemes)?;
        rep.quad.merge(&out.inner_quad);
        rep.quad.absorb(out.in_norm.rel_quad_error, out.in_norm.converged);
        rep.quad.absorb(out.out_norm.rel_quad_error, out.out_norm.converged);
        regularized |= out.in_norm.regularized || out.out_norm.regularized;
        if !(out.in_norm.value > 0.0) || !out.in_norm.value.is_finite() {
            rep.notes.push(format!("sweep point r = {r} skipped: degenerate input norm"));
            continue;
        }
        let ratio = out.ratio();
        let predictor = necessity_predictor(&w, &ctx.alpha, cfg.p, &ctx.violated, r);
        let kmax = k.iter().copied().max().unwrap_or(1);
        let trunc = required_degree(r, kmax, EXTREMAL_TAIL_REL);
        let coord = format!("{r}");
        rep.push_row(coord.clone(), "in_norm", out.in_norm.value, out.in_norm.est_error);
        rep.push_row(coord.clone(), "out_norm", out.out_norm.value, out.out_norm.est_error);
        rep.push_row(coord.clone(), "ratio", ratio, 0.0);
        rep.push_row(coord.clone(), "predictor", predictor, 0.0);
        rep.push_row(coord, "truncation_degree", trunc as f64, 0.0);
        used_rs.push(r);
        ratios.push(ratio);
        predictors.push(predictor);
        in_norms.push(out.in_norm.value);
        log_terms.push((1.0 / (1.0 - zeta_tilde_modulus(r))).ln());
    }
    if regularized {
        rep.notes.push("norm exponent clipped on at least one factor (regularized values; comparable at fixed scheme)".into());
    }
    if ratios.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} usable sweep points; need at least 3 for slope detection",
            ratios.len()
        )));
    }

    // growth slope over the last three usable points
    let tail = 3.min(ratios.len());
    let xs: Vec<f64> = used_rs[used_rs.len() - tail..]
        .iter()
        .map(|r| (1.0 / (1.0 - r)).ln())
        .collect();
    let ys: Vec<f64> = ratios[ratios.len() - tail..].iter().map(|v| v.max(1e-300).ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    let rho = spearman(&ratios, &predictors);

    let norm_hi = in_norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm_lo = in_norms.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.insert_metric("growth_slope", slope);
    rep.insert_metric("spearman_rho", rho);
    rep.insert_metric("predictor_first", predictors[0]);
    rep.insert_metric("predictor_last", *predictors.last().unwrap());
    rep.insert_metric("input_norm_band", norm_hi / norm_lo);
    rep.insert_metric("boundary_case", if boundary_case { 1.0 } else { 0.0 });
    rep.policy.insert("slope_min".into(), cfg.detection.slope_min);
    rep.policy.insert("spearman_min".into(), cfg.detection.spearman_min);

    if boundary_case {
        // power predictor is flat; fit ratio ~ c * log(1/(1-|zeta~|))
        let (c, corr) = proportional_fit(&log_terms, &ratios);
        let increasing = ratios.windows(2).all(|ab| ab[1] > ab[0]);
        rep.insert_metric("log_fit_c", c);
        rep.insert_metric("log_fit_pearson", corr);
        rep.policy.insert("log_fit_pearson_min".into(), LOG_FIT_PEARSON_MIN);
        rep.verdict =
            Verdict::from_bool(c > 0.0 && corr >= LOG_FIT_PEARSON_MIN && increasing);
        rep.rule = "boundary case: pass iff the ratio fits c*log(1/(1-|zeta~|)) with c > 0, \
                    Pearson >= policy floor, and increases monotonically"
            .into();
    } else {
        rep.verdict = Verdict::from_bool(
            slope >= cfg.detection.slope_min && rho >= cfg.detection.spearman_min,
        );
        rep.rule = "pass iff the log-log ratio slope over the last three sweep points >= \
                    slope_min and Spearman(ratio, predictor) >= spearman_min"
            .into();
    }
    Ok(rep)
}

/// Structural checks: L1 (pointwise bound), L2 (kernel-moment ratio), P1
/// (dyadic comparability + covering multiplicity).
pub fn run_lemma_or_prop(target: Target, cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    match target {
        Target::L2 => {
            if cfg.n != 1 {
                return Err(Error::InvalidInput("L2 check is one-dimensional".into()));
            }
            let l2 = cfg
                .lemma2
                .ok_or_else(|| Error::InvalidInput("L2 requires config key lemma2: {a, b}".into()))?;
            let w = cfg.product_weight()?;
            let moduli = cfg.sorted_r_sweep();
            let mut rep = lemma2_ratio(w.factor(0), l2.a, l2.b, &moduli, &cfg.scheme())?;
            rep.repro = ReproBlock::new(cfg.seed, &cfg.hash_bytes());
            Ok(rep)
        }
        Target::P1 => {
            let pc = cfg.partition.unwrap_or_default();
            let part = build_partition(cfg.n, pc.max_level)?;
            let mut rep = check_proposition1(&part, pc.samples_per_cell)?;
            rep.repro = ReproBlock::new(cfg.seed, &cfg.hash_bytes());
            let mult = covering_multiplicity(&part)?;
            rep.insert_metric("covering_multiplicity", mult as f64);
            let mult_cap = 9usize.pow(cfg.n as u32);
            rep.policy.insert("multiplicity_cap".into(), mult_cap as f64);
            if mult > mult_cap {
                rep.verdict = Verdict::Fail;
                rep.notes.push(format!("covering multiplicity {mult} exceeds cap {mult_cap}"));
            }
            Ok(rep)
        }
        Target::L1 => run_l1(cfg),
        _ => Err(Error::InvalidInput(format!(
            "target {target} is an operator target; use sufficiency or necessity mode"
        ))),
    }
}

fn run_l1(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let l1 = cfg
        .lemma1
        .clone()
        .ok_or_else(|| Error::InvalidInput("L1 requires config key lemma1: {m}".into()))?;
    if l1.m.len() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, got: l1.m.len() });
    }
    let w = cfg.product_weight()?;
    let m = MultiIndex::new(l1.m.iter().map(|v| v.round().max(0.0) as usize).collect());
    let mut hyp_ok = true;
    for j in 0..cfg.n {
        let (a_w, _) = w.factor(j).regularity_indices()?;
        if (l1.m[j]) < a_w - 1.0 {
            hyp_ok = false;
        }
    }
    let sp = SpaceParams::new(cfg.p, w.clone(), cfg.scheme())?;

    // small family: monomials + a few seeded random polynomials
    let mut family = Vec::new();
    let mono_bound = if cfg.n == 1 { vec![4] } else { vec![1; cfg.n] };
    for k in MultiIndex::box_iter(&MultiIndex::new(mono_bound)) {
        family.push((
            format!("monomial:{}", k.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")),
            PolySeries::monomial(k),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..5 {
        let bound = MultiIndex::new(if cfg.n == 1 { vec![6] } else { vec![2; cfg.n] });
        let mut terms = Vec::new();
        for kk in MultiIndex::box_iter(&bound) {
            let mag: f64 = rng.random_range(0.3..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            terms.push((kk, C64::from_polar(mag * 0.7f64.powi(0), phase)));
        }
        family.push((format!("random:{i}"), PolySeries::from_terms(cfg.n, bound, &terms, false)?));
    }

    let mut rep = base_report(Target::L1, Mode::Check, cfg);
    rep.hypothesis_satisfied = hyp_ok;
    rep.notes.push(format!("derivative-kernel exponents m = {:?}", l1.m));
    if !hyp_ok {
        rep.notes.push("exponent condition m_j >= a_w_j - 1 violated: expecting the empirical constant to blow up".into());
    }

    let moduli = [0.5, 0.9, 0.99];
    let mut sups = Vec::new();
    for &zm in &moduli {
        let samples: Vec<Vec<C64>> = (0..4)
            .map(|i| {
                let th = std::f64::consts::TAU * (i as f64 + 0.37) / 4.0;
                (0..cfg.n).map(|j| C64::from_polar(zm, th + 0.21 * j as f64)).collect()
            })
            .collect();
        let mut fam_sup = 0.0f64;
        for (_, f) in &family {
            let sub = lemma1_ratio(f, &m, &samples, &sp)?;
            rep.quad.merge(&sub.quad);
            if let Some(v) = sub.metric("sup_ratio") {
                fam_sup = fam_sup.max(v);
            }
        }
        rep.push_row(format!("{zm}"), "family_sup_ratio", fam_sup, 0.0);
        sups.push(fam_sup);
    }
    let growth = sups.last().unwrap() / sups.first().unwrap().max(f64::MIN_POSITIVE);
    rep.insert_metric("boundary_growth", growth);
    rep.insert_metric("family_sup", sups.iter().cloned().fold(0.0, f64::max));
    rep.policy.insert("growth_tolerance".into(), L1_GROWTH_TOL);
    let bounded = growth <= L1_GROWTH_TOL && sups.iter().all(|v| v.is_finite());
    rep.verdict = Verdict::from_bool(if hyp_ok { bounded } else { !bounded });
    rep.rule = "hypothesis satisfied: pass iff the family sup ratio stays within the growth \
                tolerance from |z| = 0.5 to 0.99; violated: pass iff it blows past it"
        .into();
    Ok(rep)
}

/// CLI dispatcher: explicit mode, or automatic (operator targets pick
/// sufficiency when the index condition holds, necessity otherwise).
pub fn run_target(
    target: Target,
    mode: Option<Mode>,
    cfg: &ExperimentConfig,
) -> Result<VerificationReport> {
    match target {
        Target::L1 | Target::L2 | Target::P1 => run_lemma_or_prop(target, cfg),
        _ => match mode {
            Some(Mode::Sufficiency) => run_sufficiency(target, cfg),
            Some(Mode::Necessity) => run_necessity(target, cfg),
            Some(Mode::Check) => Err(Error::InvalidInput(
                "check mode applies to L1, L2, P1 only".into(),
            )),
            None => {
                let ctx = target_context(target, cfg)?;
                if ctx.satisfied() {
                    run_sufficiency(target, cfg)
                } else {
                    run_necessity(target, cfg)
                }
            }
        },
    }
}
