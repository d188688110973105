//! Dyadic decomposition of the disc into annular sectors, their enlargements,
//! and the geometric comparability checks the decomposition is used for.
//!
//! Level k occupies the radial shell [1-2^{-k}, 1-2^{-(k+1)}) (level 0 starts
//! at the origin) split into 2^{k+1} arcs of width pi 2^{-k}, indexed
//! l in {-2^k, ..., 2^k - 1} so the arcs tile [-pi, pi) disjointly. The
//! enlarged cell scales both half-widths by 4/3 about the center. Product
//! cells over n factors are cartesian; every check reduces to per-factor
//! geometry, with bands exponentiating in the dimension.

use crate::error::{Error, Result};
use crate::report::{Mode, ReproBlock, VerificationReport, Verdict};
use crate::C64;

/// Enlargement applied to both half-widths of a cell.
pub const ENLARGEMENT: f64 = 4.0 / 3.0;

/// Exact level-independent band for (1-|center|)/(1-|zeta|), zeta in the
/// closed cell: endpoints attained at the radial edges.
pub const RADIAL_BAND: (f64, f64) = (0.75, 1.5);

/// Exact level-independent band for (1-|center|)^2 / measure: the upper end
/// is the level-0 value 9/(2 pi), the lower end the level limit 9/(8 pi).
pub fn measure_band() -> (f64, f64) {
    (9.0 / (8.0 * std::f64::consts::PI), 9.0 / (2.0 * std::f64::consts::PI))
}

/// One annular sector of a single factor disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorCell {
    pub level: u32,
    pub index: i64,
}

impl FactorCell {
    pub fn new(level: u32, index: i64) -> Result<Self> {
        let arcs = 1i64 << level;
        if index < -arcs || index >= arcs {
            return Err(Error::InvalidInput(format!(
                "angular index {index} outside [-2^{level}, 2^{level})"
            )));
        }
        Ok(FactorCell { level, index })
    }

    pub fn radial_interval(&self) -> (f64, f64) {
        let lo = 1.0 - 2f64.powi(-(self.level as i32));
        let hi = 1.0 - 2f64.powi(-(self.level as i32 + 1));
        (lo, hi)
    }

    pub fn angular_interval(&self) -> (f64, f64) {
        let w = std::f64::consts::PI * 2f64.powi(-(self.level as i32));
        (self.index as f64 * w, (self.index as f64 + 1.0) * w)
    }

    /// Center radius 1 - 3 * 2^{-(k+2)}, the radial midpoint.
    pub fn center(&self) -> C64 {
        let r = 1.0 - 3.0 * 2f64.powi(-(self.level as i32 + 2));
        let (t0, t1) = self.angular_interval();
        C64::from_polar(r, 0.5 * (t0 + t1))
    }

    /// Planar area: (arc width / 2) * (r_hi^2 - r_lo^2), in closed form
    /// pi 2^{-2(k+1)} (2 - 3 * 2^{-(k+1)}).
    pub fn measure(&self) -> f64 {
        let k = self.level as i32;
        std::f64::consts::PI * 2f64.powi(-2 * (k + 1)) * (2.0 - 3.0 * 2f64.powi(-(k + 1)))
    }

    pub fn contains_polar(&self, r: f64, theta: f64) -> bool {
        let (r0, r1) = self.radial_interval();
        if !(r0 <= r && r < r1) {
            return false;
        }
        let (t0, t1) = self.angular_interval();
        let t = wrap_angle(theta);
        t0 <= t && t < t1
    }

    /// Membership in the 4/3-enlarged cell (closed, with angular wraparound).
    pub fn enlarged_contains_polar(&self, r: f64, theta: f64) -> bool {
        let (r0, r1) = self.radial_interval();
        let (rc, rh) = (0.5 * (r0 + r1), 0.5 * (r1 - r0));
        if (r - rc).abs() > ENLARGEMENT * rh {
            return false;
        }
        let (t0, t1) = self.angular_interval();
        let (tc, th) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
        wrap_angle(theta - tc).abs() <= ENLARGEMENT * th
    }

    pub fn id(&self) -> String {
        format!("k{}:l{}", self.level, self.index)
    }
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = (t + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if x >= std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// A product cell over all factors.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicCell {
    pub factors: Vec<FactorCell>,
}

impl DyadicCell {
    pub fn center(&self) -> Vec<C64> {
        self.factors.iter().map(FactorCell::center).collect()
    }

    pub fn measure(&self) -> f64 {
        self.factors.iter().map(FactorCell::measure).product()
    }

    pub fn id(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(FactorCell::id).collect();
        parts.join("|")
    }
}

/// All cells with levels up to `max_level`, shared across the n factors.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    pub dim: usize,
    pub max_level: u32,
    factor_cells: Vec<FactorCell>,
}

/// Enumerates the factor-disc cells of all levels k <= max_level.
pub fn build_partition(dim: usize, max_level: u32) -> Result<DyadicPartition> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if max_level > 24 {
        return Err(Error::InvalidInput("max_level > 24 is not materializable".into()));
    }
    let mut cells = Vec::new();
    for k in 0..=max_level {
        let arcs = 1i64 << k;
        for l in -arcs..arcs {
            cells.push(FactorCell { level: k, index: l });
        }
    }
    Ok(DyadicPartition { dim, max_level, factor_cells: cells })
}

impl DyadicPartition {
    pub fn factor_cells(&self) -> &[FactorCell] {
        &self.factor_cells
    }

    /// Number of product cells.
    pub fn cell_count(&self) -> usize {
        self.factor_cells.len().pow(self.dim as u32)
    }

    /// Cartesian enumeration of product cells in lexicographic factor order.
    pub fn product_cells(&self) -> impl Iterator<Item = DyadicCell> + '_ {
        let per = self.factor_cells.len();
        let total = self.cell_count();
        (0..total).map(move |flat| {
            let mut idx = flat;
            let mut factors = vec![self.factor_cells[0]; self.dim];
            for j in (0..self.dim).rev() {
                factors[j] = self.factor_cells[idx % per];
                idx /= per;
            }
            DyadicCell { factors }
        })
    }

    /// The unique un-enlarged factor cell containing the polar point, if the
    /// point lies in the covered region r < 1 - 2^{-(K+1)}.
    pub fn locate_factor(&self, r: f64, theta: f64) -> Option<FactorCell> {
        if !(0.0..1.0).contains(&r) {
            return None;
        }
        let t = 1.0 - r;
        // shell candidate from 2^{-(k+1)} < t <= 2^{-k}; neighbors absorb
        // floating drift at the boundaries
        let k = if r == 0.0 { 0 } else { (-t.log2()).floor() as i64 };
        for kk in [k - 1, k, k + 1] {
            if kk < 0 || kk > self.max_level as i64 {
                continue;
            }
            let w = std::f64::consts::PI * 2f64.powi(-(kk as i32));
            let l = (wrap_angle(theta) / w).floor() as i64;
            if let Ok(cell) = FactorCell::new(kk as u32, l) {
                if cell.contains_polar(r, theta) {
                    return Some(cell);
                }
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Comparability checks
// ---------------------------------------------------------------------------

/// Per-level and global extremes of the two comparability ratios, sampled on
/// a deterministic grid over the closure of every factor cell.
pub fn check_proposition1(
    part: &DyadicPartition,
    samples_per_cell: usize,
) -> Result<VerificationReport> {
    if samples_per_cell < 4 {
        return Err(Error::InvalidInput("need >= 4 samples per cell".into()));
    }
    let side = (samples_per_cell as f64).sqrt().ceil() as usize;

    let config = serde_json::to_vec(&serde_json::json!({
        "op": "check_proposition1", "dim": part.dim, "max_level": part.max_level,
        "samples_per_cell": samples_per_cell,
    }))?;
    let mut rep = VerificationReport::new("P1", Mode::Check, ReproBlock::new(0, &config));

    let mut radial_lo = f64::INFINITY;
    let mut radial_hi = f64::NEG_INFINITY;
    let mut measure_lo = f64::INFINITY;
    let mut measure_hi = f64::NEG_INFINITY;

    for k in 0..=part.max_level {
        let mut lvl_radial = (f64::INFINITY, f64::NEG_INFINITY);
        // both ratios are angular-invariant, so one representative cell per
        // level carries all the information; the grid still spans the cell
        let cell = FactorCell::new(k, 0)?;
        let (r0, r1) = cell.radial_interval();
        let center_dist = 1.0 - cell.center().norm();
        for i in 0..side {
            let fr = i as f64 / (side - 1).max(1) as f64;
            let r = r0 + fr * (r1 - r0); // closure: endpoints included
            let ratio = center_dist / (1.0 - r);
            lvl_radial.0 = lvl_radial.0.min(ratio);
            lvl_radial.1 = lvl_radial.1.max(ratio);
        }
        let m_ratio = center_dist * center_dist / cell.measure();
        radial_lo = radial_lo.min(lvl_radial.0);
        radial_hi = radial_hi.max(lvl_radial.1);
        measure_lo = measure_lo.min(m_ratio);
        measure_hi = measure_hi.max(m_ratio);
        rep.push_row(format!("k{k}"), "radial_ratio_min", lvl_radial.0, 0.0);
        rep.push_row(format!("k{k}"), "radial_ratio_max", lvl_radial.1, 0.0);
        rep.push_row(format!("k{k}"), "measure_ratio", m_ratio, 0.0);
    }

    let n = part.dim as i32;
    rep.insert_metric("radial_band_lo", radial_lo.powi(n));
    rep.insert_metric("radial_band_hi", radial_hi.powi(n));
    rep.insert_metric("measure_band_lo", measure_lo.powi(n));
    rep.insert_metric("measure_band_hi", measure_hi.powi(n));

    let (mb_lo, mb_hi) = measure_band();
    let slack = 1.0 + 1e-9;
    let radial_ok = radial_lo >= RADIAL_BAND.0 / slack && radial_hi <= RADIAL_BAND.1 * slack;
    let measure_ok = measure_lo >= mb_lo / slack && measure_hi <= mb_hi * slack;
    rep.policy.insert("radial_band_lo_expected".into(), RADIAL_BAND.0);
    rep.policy.insert("radial_band_hi_expected".into(), RADIAL_BAND.1);
    rep.policy.insert("measure_band_lo_expected".into(), mb_lo);
    rep.policy.insert("measure_band_hi_expected".into(), mb_hi);
    rep.verdict = Verdict::from_bool(radial_ok && measure_ok);
    rep.rule = "pass iff per-factor radial ratios lie in [3/4, 3/2] and measure ratios \
                in [9/(8pi), 9/(2pi)], both level-independent closed-form bands"
        .into();
    Ok(rep)
}

/// Max over sampled points of the number of enlarged cells containing the
/// point, per factor; the product-cell multiplicity is this to the n-th
/// power. Sampling probes cell corners and centers, where the overlap count
/// peaks.
pub fn covering_multiplicity(part: &DyadicPartition) -> Result<usize> {
    let mut max_count = 0usize;
    for cell in &part.factor_cells {
        let (r0, r1) = cell.radial_interval();
        let (t0, t1) = cell.angular_interval();
        for fr in [0.02, 0.5, 0.98] {
            for ft in [0.02, 0.5, 0.98] {
                let r = r0 + fr * (r1 - r0);
                let t = t0 + ft * (t1 - t0);
                let count = part
                    .factor_cells
                    .iter()
                    .filter(|c| c.enlarged_contains_polar(r, t))
                    .count();
                max_count = max_count.max(count);
            }
        }
    }
    Ok(max_count.pow(part.dim as u32))
}

/// Closed-form total measure of all cells up to the partition's max level:
/// the area of the disc of radius 1 - 2^{-(K+1)}, per factor.
pub fn covered_area_closed_form(max_level: u32) -> f64 {
    let r = 1.0 - 2f64.powi(-(max_level as i32 + 1));
    std::f64::consts::PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn cell_counts_per_level() {
        assert_eq!(build_partition(1, 0).unwrap().factor_cells().len(), 2);
        assert_eq!(build_partition(1, 1).unwrap().factor_cells().len(), 6);
        assert_eq!(build_partition(1, 3).unwrap().factor_cells().len(), 30);
        assert_eq!(build_partition(2, 1).unwrap().cell_count(), 36);
    }

    #[test]
    fn center_example_level1() {
        let c = FactorCell::new(1, 0).unwrap().center();
        assert_relative_eq!(c.norm(), 0.625, max_relative = 1e-15);
        assert_relative_eq!(c.arg(), PI / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn level0_covers_origin_disc() {
        let c = FactorCell::new(0, -1).unwrap();
        assert_eq!(c.radial_interval(), (0.0, 0.5));
        assert!(c.contains_polar(0.0, -0.5));
        assert_relative_eq!(1.0 - c.center().norm(), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn measure_additivity_closed_form() {
        for max_level in [0u32, 3, 8] {
            let part = build_partition(1, max_level).unwrap();
            let total: f64 = part.factor_cells().iter().map(FactorCell::measure).sum();
            assert_relative_eq!(
                total,
                covered_area_closed_form(max_level),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn locate_is_unique_and_consistent() {
        let part = build_partition(1, 6).unwrap();
        let r_max = 1.0 - 2f64.powi(-7);
        // deterministic low-discrepancy-ish sweep
        for i in 0..10_000 {
            let x = (i as f64 + 0.5) / 10_000.0;
            let r = r_max * x.sqrt();
            let t = wrap_angle(i as f64 * 2.399963);
            let cell = part.locate_factor(r, t);
            let brute: Vec<&FactorCell> = part
                .factor_cells()
                .iter()
                .filter(|c| c.contains_polar(r, t))
                .collect();
            assert_eq!(brute.len(), 1, "point r={r} t={t}");
            assert_eq!(cell.as_ref(), Some(brute[0]));
        }
    }

    #[test]
    fn proposition1_bands() {
        let part = build_partition(1, 8).unwrap();
        let rep = check_proposition1(&part, 16).unwrap();
        assert!(rep.verdict.passed(), "{:?}", rep.metrics);
        assert_relative_eq!(rep.metric("radial_band_lo").unwrap(), 0.75, epsilon = 1e-12);
        assert_relative_eq!(rep.metric("radial_band_hi").unwrap(), 1.5, epsilon = 1e-12);
        // measure ratio is exactly 9 / (4 pi (2 - 3 2^{-(k+1)})), decreasing in k
        let k0 = 9.0 / (2.0 * PI);
        assert_relative_eq!(rep.metric("measure_band_hi").unwrap(), k0, epsilon = 1e-12);
    }

    #[test]
    fn shared_levels_have_identical_band_rows() {
        let a = check_proposition1(&build_partition(1, 3).unwrap(), 16).unwrap();
        let b = check_proposition1(&build_partition(1, 8).unwrap(), 16).unwrap();
        for k in 0..=3 {
            let coord = format!("k{k}");
            for metric in ["radial_ratio_min", "radial_ratio_max", "measure_ratio"] {
                let va = a.rows.iter().find(|r| r.coordinate == coord && r.metric == metric);
                let vb = b.rows.iter().find(|r| r.coordinate == coord && r.metric == metric);
                assert_eq!(va.unwrap().value.to_bits(), vb.unwrap().value.to_bits());
            }
        }
    }

    #[test]
    fn multiplicity_small_and_level_stable() {
        let m2 = covering_multiplicity(&build_partition(1, 2).unwrap()).unwrap();
        assert!(m2 <= 9, "multiplicity {m2}");
        let m3 = covering_multiplicity(&build_partition(1, 3).unwrap()).unwrap();
        let m6 = covering_multiplicity(&build_partition(1, 6).unwrap()).unwrap();
        assert_eq!(m3, m6);
        // dimension exponentiation
        let m3_2d = covering_multiplicity(&build_partition(2, 3).unwrap()).unwrap();
        assert_eq!(m3_2d, m3 * m3);
    }

    #[test]
    fn unenlarged_cells_have_multiplicity_one() {
        let part = build_partition(1, 4).unwrap();
        for i in 0..2000 {
            let x = (i as f64 + 0.5) / 2000.0;
            let r = (1.0 - 2f64.powi(-5)) * x;
            let t = wrap_angle(i as f64 * 1.618_033_9);
            let count = part
                .factor_cells()
                .iter()
                .filter(|c| c.contains_polar(r, t))
                .count();
            assert_eq!(count, 1, "r={r} t={t}");
        }
    }

    #[test]
    fn product_cells_enumerate_lexicographically() {
        let part = build_partition(2, 0).unwrap();
        let ids: Vec<String> = part.product_cells().map(|c| c.id()).collect();
        assert_eq!(ids.len(), 4);
        assert_eq!(ids[0], "k0:l-1|k0:l-1");
        assert_eq!(ids[3], "k0:l0|k0:l0");
        let c = part.product_cells().next().unwrap();
        assert_relative_eq!(
            c.measure(),
            FactorCell::new(0, -1).unwrap().measure().powi(2),
            max_relative = 1e-15
        );
    }
}
