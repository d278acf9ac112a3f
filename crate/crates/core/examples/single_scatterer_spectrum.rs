//! Perturbed levels of one point scatterer, next to the unperturbed ones.

use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::{solve, EnergyWindow, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 20_000;
    let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n_max)?);
    let set = ScattererSet::single(Point::new(0.3137, 0.5279), 0.5, 1.0);
    let greens = Greens::new(table.clone(), set)?;
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);

    let window = EnergyWindow::new(0.0, table.energies()[20])?;
    let result = solve(&greens, &window, &acc, &SolverOptions::default())?;

    println!("{:>3} {:>12} {:>12} {:>10}", "k", "ε_k", "ω_k", "kind");
    for (k, level) in result.levels.iter().enumerate() {
        let eps = table.energies().get(k).copied().unwrap_or(f64::NAN);
        println!("{:>3} {:>12.6} {:>12.6} {:>10?}", k + 1, eps, level.omega, level.kind);
    }
    println!("max residual {:.2e}", result.diagnostics.max_residual);
    Ok(())
}
