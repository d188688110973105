//! The dyadic boundary-shell partition: cell geometry, point location, the
//! comparability bands, and enlarged-cell covering multiplicity.
//!
//! Run with `cargo run --example dyadic_partition`.

use besov::partition::{
    build_partition, check_proposition1, covered_area_closed_form, covering_multiplicity,
    measure_band, FactorCell, RADIAL_BAND,
};

fn main() -> besov::Result<()> {
    let part = build_partition(1, 4)?;
    println!("levels 0..=4: {} cells, covered area {:.6} of pi", part.cell_count(),
        covered_area_closed_form(4) / std::f64::consts::PI);

    // Geometry of one cell: level-2 shell, arc index 3.
    let cell = FactorCell::new(2, 3)?;
    let (r0, r1) = cell.radial_interval();
    let c = cell.center();
    println!(
        "\ncell {}: radial [{:.4}, {:.4}), center {:.4}+{:.4}i, measure {:.6}",
        cell.id(), r0, r1, c.re, c.im, cell.measure()
    );

    // Every interior point lands in exactly one cell.
    let hits = part.locate_factor(0.83, 1.2);
    println!("locate(0.83, 1.2) -> {}", hits.map(|c| c.id()).unwrap_or_default());

    // Comparability: 1-|center| ~ radial width ~ sqrt(measure), with
    // level-independent constants.
    let report = check_proposition1(&part, 16)?;
    println!(
        "\ncomparability check: {:?}  (radial band [{}, {}], measure band [{:.4}, {:.4}])",
        report.verdict,
        RADIAL_BAND.0,
        RADIAL_BAND.1,
        measure_band().0,
        measure_band().1
    );
    for key in ["radial_band_lo", "radial_band_hi", "measure_band_lo", "measure_band_hi"] {
        if let Some(v) = report.metric(key) {
            println!("  observed {key} = {v:.6}");
        }
    }

    // Enlarged cells (both widths scaled by 4/3) overlap only within a
    // bounded multiplicity.
    let mult = covering_multiplicity(&part)?;
    println!("\ncovering multiplicity of the 4/3-enlarged cells: {mult}");
    Ok(())
}
