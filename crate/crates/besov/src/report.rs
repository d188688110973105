//! Structured outcomes of verification probes and their serialization.
//!
//! Reports are built from ordered containers only (BTreeMap, Vec), float
//! text comes from the shortest-round-trip formatter, and the JSON emitter
//! isolates the timestamp on its own line — so two runs with the same seed
//! and config produce byte-identical output apart from that one line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Parameters satisfy the statement's hypothesis; expect bounded ratios.
    Sufficiency,
    /// Hypothesis deliberately violated; expect detectable divergence.
    Necessity,
    /// Direct computation or geometric check, no dichotomy involved.
    Check,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sufficiency" => Ok(Mode::Sufficiency),
            "necessity" => Ok(Mode::Necessity),
            "check" => Ok(Mode::Check),
            other => Err(crate::Error::InvalidInput(format!(
                "unknown mode {other:?}; expected sufficiency, necessity, or check"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sufficiency => "sufficiency",
            Mode::Necessity => "necessity",
            Mode::Check => "check",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok { Verdict::Pass } else { Verdict::Fail }
    }
}

/// One per-point observation: `coordinate` is the sweep variable printed in
/// a stable human-readable form (an r value, a |z| value, a cell id, ...).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub coordinate: String,
    pub metric: String,
    pub value: f64,
    pub est_error: f64,
}

/// Worst-case quadrature health over everything a probe integrated.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct QuadSummary {
    pub max_rel_est_error: f64,
    pub non_convergent_points: usize,
}

impl QuadSummary {
    pub fn absorb(&mut self, rel_err: f64, converged: bool) {
        if rel_err.is_finite() && rel_err > self.max_rel_est_error {
            self.max_rel_est_error = rel_err;
        }
        if !converged {
            self.non_convergent_points += 1;
        }
    }

    pub fn merge(&mut self, other: &QuadSummary) {
        if other.max_rel_est_error > self.max_rel_est_error {
            self.max_rel_est_error = other.max_rel_est_error;
        }
        self.non_convergent_points += other.non_convergent_points;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproBlock {
    pub seed: u64,
    pub version: String,
    pub config_hash: String,
}

impl ReproBlock {
    pub fn new(seed: u64, config_bytes: &[u8]) -> Self {
        ReproBlock {
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(config_bytes),
        }
    }
}

/// First 16 hex characters of the SHA-256 of the canonical config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Structured outcome of one probe run. The verdict is a pure function of
/// `metrics` and `policy` via the rule recorded in `rule`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub target: String,
    pub mode: Mode,
    pub verdict: Verdict,
    pub hypothesis_satisfied: bool,
    /// Scalar outcomes (sup ratios, slopes, correlations, ...).
    pub metrics: BTreeMap<String, f64>,
    /// Detection thresholds and parameters the verdict used.
    pub policy: BTreeMap<String, f64>,
    pub rows: Vec<ReportRow>,
    pub quad: QuadSummary,
    pub repro: ReproBlock,
    pub notes: Vec<String>,
    /// Human-readable statement of how the verdict follows from the metrics.
    pub rule: String,
}

impl VerificationReport {
    pub fn new(target: impl Into<String>, mode: Mode, repro: ReproBlock) -> Self {
        VerificationReport {
            target: target.into(),
            mode,
            verdict: Verdict::Fail,
            hypothesis_satisfied: true,
            metrics: BTreeMap::new(),
            policy: BTreeMap::new(),
            rows: Vec::new(),
            quad: QuadSummary::default(),
            repro,
            notes: Vec::new(),
            rule: String::new(),
        }
    }

    /// Non-finite values are clamped and flagged so serialization never
    /// produces JSON nulls behind our back.
    pub fn insert_metric(&mut self, key: &str, value: f64) {
        let v = if value.is_finite() {
            value
        } else {
            self.notes.push(format!("metric {key} was non-finite ({value}); clamped"));
            if value.is_sign_negative() { -f64::MAX } else { f64::MAX }
        };
        self.metrics.insert(key.to_string(), v);
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn push_row(&mut self, coordinate: impl Into<String>, metric: &str, value: f64, est_error: f64) {
        self.rows.push(ReportRow {
            coordinate: coordinate.into(),
            metric: metric.to_string(),
            value: if value.is_finite() { value } else { f64::MAX },
            est_error: if est_error.is_finite() { est_error } else { f64::MAX },
        });
    }

    /// Flat per-point table. Scalar metrics are appended as `summary` rows
    /// and the verdict as a final 0/1 row, so the CSV alone determines the
    /// outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,mode,coordinate,metric,value,est_error\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.target, self.mode, row.coordinate, row.metric, row.value, row.est_error
            ));
        }
        for (k, v) in &self.metrics {
            out.push_str(&format!("{},{},summary,{},{},0\n", self.target, self.mode, k, v));
        }
        out.push_str(&format!(
            "{},{},summary,verdict_pass,{},0\n",
            self.target,
            self.mode,
            if self.verdict.passed() { 1 } else { 0 }
        ));
        out
    }

    /// Pretty JSON with the emission timestamp isolated on the second line;
    /// everything below that line is byte-stable for a fixed seed/config.
    pub fn to_json(&self) -> Result<String> {
        let body = serde_json::to_string_pretty(self)?;
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut lines = body.splitn(2, '\n');
        let head = lines.next().unwrap_or("{");
        let rest = lines.next().unwrap_or("}");
        Ok(format!("{head}\n  \"timestamp_unix\": {now},\n{rest}"))
    }

    pub fn write_to(&self, format: ReportFormat, path: &Path) -> Result<()> {
        let bytes = match format {
            ReportFormat::Json => self.to_json()?.into_bytes(),
            ReportFormat::Csv => self.to_csv().into_bytes(),
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(&bytes)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(crate::error::Error::InvalidInput(format!(
                "unknown report format {other:?} (expected json or csv)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new("T1", Mode::Sufficiency, ReproBlock::new(7, b"{}"));
        r.hypothesis_satisfied = true;
        r.insert_metric("sup_ratio", 1.25);
        r.push_row("0.5", "ratio", 1.0, 1e-9);
        r.push_row("0.9", "ratio", 1.25, 2e-9);
        r.verdict = Verdict::Pass;
        r.rule = "pass iff ratios stabilize".into();
        r
    }

    #[test]
    fn csv_shape_and_header() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "target,mode,coordinate,metric,value,est_error");
        assert_eq!(lines.next().unwrap(), "T1,sufficiency,0.5,ratio,1,0.000000001");
        assert!(csv.trim_end().ends_with("T1,sufficiency,summary,verdict_pass,1,0"));
    }

    #[test]
    fn empty_report_still_has_header() {
        let mut r = VerificationReport::new("L2", Mode::Check, ReproBlock::new(0, b""));
        r.verdict = Verdict::Pass;
        let csv = r.to_csv();
        assert!(csv.starts_with("target,mode,coordinate,metric,value,est_error\n"));
        // header + verdict row only
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn json_timestamp_confined_to_one_line() {
        let r = sample();
        let a = r.to_json().unwrap();
        std::thread::sleep(std::time::Duration::from_millis(3));
        let b = r.to_json().unwrap();
        let strip = |s: &str| -> Vec<String> {
            s.lines()
                .filter(|l| !l.contains("timestamp_unix"))
                .map(|l| l.to_string())
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.lines().filter(|l| l.contains("timestamp_unix")).count(), 1);
        // still valid JSON
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["target"], "T1");
        assert!(v["timestamp_unix"].is_u64());
    }

    #[test]
    fn non_finite_metrics_are_clamped_with_note() {
        let mut r = VerificationReport::new("T2", Mode::Necessity, ReproBlock::new(1, b"x"));
        r.insert_metric("slope", f64::INFINITY);
        assert_eq!(r.metric("slope"), Some(f64::MAX));
        assert_eq!(r.notes.len(), 1);
        assert!(r.to_json().is_ok());
    }

    #[test]
    fn config_hash_is_stable_and_short() {
        let h = config_hash(b"{\"n\":1}");
        assert_eq!(h.len(), 16);
        assert_eq!(h, config_hash(b"{\"n\":1}"));
        assert_ne!(h, config_hash(b"{\"n\":2}"));
    }
}
