//! Where Ḡ(ω) turns over inside each gap, against the log law.

use std::f64::consts::PI;
use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::EnergyWindow;
use point_billiard::stats::gbar_inflection_survey;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 50_000;
    let spec = BilliardSpec::golden();
    let table = Arc::new(ModeTable::lowest(spec, n_max)?);
    let greens = Greens::new(table.clone(), ScattererSet::single(Point::new(0.3137, 0.5279), 0.0, 1.0))?;
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);
    let window = EnergyWindow::from_levels(&table, 2000, 2400)?;

    let survey = gbar_inflection_survey(&greens, &window, &acc)?;
    for r in survey.rows.iter().take(8) {
        println!(
            "gap ({:.3}, {:.3})  ω̃={:.4}  Ḡ={:+.4}  log law {:+.4}  |Ḡ'|/ρ={:.3}",
            r.gap_lo,
            r.gap_hi,
            r.omega_tilde,
            r.g_bar,
            r.log_law,
            r.abs_derivative / spec.weyl_density()
        );
    }
    println!("... {} gaps", survey.rows.len());
    println!("median Ḡ − log law   {:+.4}", survey.median_log_offset().unwrap_or(f64::NAN));
    println!("median |Ḡ'|/ρ        {:.4}  (picket-fence estimate {:.4})", survey.median_width(&spec).unwrap_or(f64::NAN), PI / 2.0);
    println!("median midpoint offset {:.4}", survey.median_midpoint_offset().unwrap_or(f64::NAN));
    for note in &survey.notes {
        println!("note: {note}");
    }
    Ok(())
}
