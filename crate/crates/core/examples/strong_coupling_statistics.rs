//! Spacing statistics with the coupling tuned into, and away from, the
//! strong band.

use std::f64::consts::PI;
use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::{solve, EnergyWindow, SolverOptions};
use point_billiard::stats::{band_center, compare_references, exclude_lowest, predict_strong_coupling, unfold};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 50_000;
    let spec = BilliardSpec::golden();
    let table = Arc::new(ModeTable::lowest(spec, n_max)?);
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);
    let window = EnergyWindow::from_levels(&table, 2000, 3300)?;
    let star = band_center(&spec, 1.0, window.center());

    for (label, v) in [("in band", star), ("detuned", star + 1.5 * PI)] {
        let set = ScattererSet::single(Point::new(0.3137, 0.5279), v, 1.0);
        let pred = predict_strong_coupling(&set, &spec, window.center())?;
        let greens = Greens::new(table.clone(), set)?;
        let levels = solve(&greens, &window, &acc, &SolverOptions::default())?.eigenvalues();
        let kept = exclude_lowest(&levels, &table, 200);
        let c = compare_references(&unfold(&kept, &spec)?)?;
        println!(
            "{label:>8}: v̄⁻¹={v:+.4} strong={} spacings={} KS Poisson {:.4}, GOE {:.4} -> {}",
            pred.in_strong_band[0],
            c.spacings,
            c.ks_poisson,
            c.ks_goe,
            c.closer_to.name()
        );
    }
    Ok(())
}
