//! JSON run configuration shared by the harness and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holocalc::PhaseConvention;
use crate::quadrature::QuadratureScheme;
use crate::weights::{ProductWeight, WeightFactor};
use crate::C64;

/// Per-factor threshold the kernel exponent alpha_j is compared against.
/// Each preset is a different reading of the index inequality; the id
/// strings are part of the config-file contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdPreset {
    /// a_w / p - 2
    #[serde(rename = "T1-style")]
    T1Style,
    /// (a_w + 2) / p - 2
    #[serde(rename = "remark1")]
    Remark1,
    /// a_w
    #[serde(rename = "plain")]
    Plain,
    /// a_w - 2
    #[serde(rename = "T2-statement")]
    T2Statement,
}

impl ThresholdPreset {
    pub fn threshold(self, a_w: f64, p: f64) -> f64 {
        match self {
            ThresholdPreset::T1Style => a_w / p - 2.0,
            ThresholdPreset::Remark1 => (a_w + 2.0) / p - 2.0,
            ThresholdPreset::Plain => a_w,
            ThresholdPreset::T2Statement => a_w - 2.0,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            ThresholdPreset::T1Style => "T1-style",
            ThresholdPreset::Remark1 => "remark1",
            ThresholdPreset::Plain => "plain",
            ThresholdPreset::T2Statement => "T2-statement",
        }
    }
}

/// Weight given either as a single factor (applied uniformly) or one factor
/// per coordinate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Single(WeightFactor),
    PerFactor(Vec<WeightFactor>),
}

/// Kernel exponent given as a scalar (uniform) or per coordinate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Scalar(f64),
    PerFactor(Vec<f64>),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Scalar(0.0)
    }
}

/// Operator symbol used by the probe runs. The default pairs every probe f
/// with its own phase-cancelling symbol, the adversarial choice.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    Phase,
    Constant { re: f64, #[serde(default)] im: f64 },
    ConjMonomial { degree: Vec<usize> },
}

impl Default for SymbolSpec {
    fn default() -> Self {
        SymbolSpec::Phase
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_radial")]
    pub radial_nodes: usize,
    #[serde(default = "default_angular")]
    pub angular_nodes: usize,
    #[serde(default = "default_refinement")]
    pub max_refinement: usize,
    #[serde(default = "default_rel_tol")]
    pub target_rel_tol: f64,
}

fn default_radial() -> usize {
    64
}
fn default_angular() -> usize {
    256
}
fn default_refinement() -> usize {
    4
}
fn default_rel_tol() -> f64 {
    1e-6
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: default_radial(),
            angular_nodes: default_angular(),
            max_refinement: default_refinement(),
            target_rel_tol: default_rel_tol(),
        }
    }
}

/// Trend-detection policy; every value is echoed into the report's policy
/// block so a verdict can be audited.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "default_slope_min")]
    pub slope_min: f64,
    #[serde(default = "default_stabilization")]
    pub stabilization_factor: f64,
    #[serde(default = "default_spearman")]
    pub spearman_min: f64,
}

fn default_slope_min() -> f64 {
    0.2
}
fn default_stabilization() -> f64 {
    2.0
}
fn default_spearman() -> f64 {
    0.8
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            slope_min: default_slope_min(),
            stabilization_factor: default_stabilization(),
            spearman_min: default_spearman(),
        }
    }
}

/// Parameters for the pointwise-bound check (target L1).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Config {
    pub m: Vec<f64>,
}

/// Parameters for the kernel-moment ratio check (target L2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma2Config {
    pub a: f64,
    pub b: f64,
}

/// Parameters for the dyadic-cell checks (target P1).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default = "default_max_level")]
    pub max_level: u32,
    #[serde(default = "default_samples_per_cell")]
    pub samples_per_cell: usize,
}

fn default_max_level() -> u32 {
    6
}
fn default_samples_per_cell() -> usize {
    16
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            max_level: default_max_level(),
            samples_per_cell: default_samples_per_cell(),
        }
    }
}

fn default_dim() -> usize {
    1
}

fn default_r_sweep() -> Vec<f64> {
    vec![0.5, 0.7, 0.9, 0.95, 0.99]
}

/// The file-level experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dim")]
    pub n: usize,
    pub p: f64,
    pub weight: WeightSpec,
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_preset: Option<ThresholdPreset>,
    #[serde(default = "default_r_sweep")]
    pub r_sweep: Vec<f64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub symbol: SymbolSpec,
    #[serde(default = "PhaseConvention::default_unimodular")]
    pub phase: PhaseConvention,
    /// Override for the extremal-family pole orders; default is the smallest
    /// integer vector satisfying k_j > (a_w_j + 2)/p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma1: Option<Lemma1Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma2: Option<Lemma2Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionConfig>,
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let cfg: ExperimentConfig = serde_json::from_slice(&bytes)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::InvalidInput(format!("p must be finite and > 0, got {}", self.p)));
        }
        for r in &self.r_sweep {
            if !(r.is_finite() && (0.0..1.0).contains(r)) {
                return Err(Error::InvalidInput(format!("r_sweep entry {r} outside [0, 1)")));
            }
        }
        if self.quadrature.radial_nodes == 0 || self.quadrature.angular_nodes == 0 {
            return Err(Error::InvalidInput("quadrature node counts must be positive".into()));
        }
        if !(self.quadrature.target_rel_tol > 0.0) {
            return Err(Error::InvalidInput("target_rel_tol must be positive".into()));
        }
        self.product_weight()?.validate()?;
        let alpha = self.alpha_vec()?;
        for a in &alpha {
            if !(a.is_finite() && *a > -1.0) {
                return Err(Error::InvalidInput(format!("alpha entry {a} must be > -1")));
            }
        }
        if let Some(k) = &self.extremal_k {
            if k.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: k.len() });
            }
        }
        Ok(())
    }

    pub fn product_weight(&self) -> Result<ProductWeight> {
        match &self.weight {
            WeightSpec::Single(f) => ProductWeight::uniform(f.clone(), self.n),
            WeightSpec::PerFactor(fs) => {
                if fs.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: fs.len() });
                }
                ProductWeight::new(fs.clone())
            }
        }
    }

    pub fn alpha_vec(&self) -> Result<Vec<f64>> {
        match &self.alpha {
            AlphaSpec::Scalar(a) => Ok(vec![*a; self.n]),
            AlphaSpec::PerFactor(v) => {
                if v.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
                }
                Ok(v.clone())
            }
        }
    }

    pub fn scheme(&self) -> QuadratureScheme {
        QuadratureScheme::new_uniform(
            self.n,
            self.quadrature.radial_nodes,
            self.quadrature.angular_nodes,
        )
        .targeting(self.quadrature.target_rel_tol, self.quadrature.max_refinement)
    }

    /// Canonical bytes hashed into the report's reproducibility block.
    pub fn hash_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("config serializes")
    }

    /// Sorted copy of the sweep (ascending r), deduplicated.
    pub fn sorted_r_sweep(&self) -> Vec<f64> {
        let mut rs = self.r_sweep.clone();
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rs.dedup();
        rs
    }
}

impl SymbolSpec {
    /// Human-readable description recorded in report notes.
    pub fn describe(&self) -> String {
        match self {
            SymbolSpec::Phase => "phase-cancelling per probe".into(),
            SymbolSpec::Constant { re, im } => format!("constant {}", C64::new(*re, *im)),
            SymbolSpec::ConjMonomial { degree } => format!("conj-monomial degree {degree:?}"),
        }
    }
}
