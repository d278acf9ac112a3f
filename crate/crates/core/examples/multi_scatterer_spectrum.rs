//! Three scatterers: levels from the eigenvalue curves of λ⁻¹(ω).

use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::{solve, EnergyWindow, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 20_000;
    let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n_max)?);
    let set = ScattererSet::new(
        vec![Point::new(0.3137, 0.5279), Point::new(0.7412, 1.1093), Point::new(0.55, 0.21)],
        vec![0.8, -0.3, 1.2],
        1.0,
    );
    let greens = Greens::new(table.clone(), set)?;
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);
    let window = EnergyWindow::from_levels(&table, 400, 430)?;

    let result = solve(&greens, &window, &acc, &SolverOptions::default())?;
    for level in &result.levels {
        println!("{:.9}  in ({:.4}, {:.4})", level.omega, level.bracket.0, level.bracket.1);
    }
    let d = &result.diagnostics;
    println!("{} levels, {} gaps, {} grid refinements", result.eigenvalues().len(), d.gaps_searched, d.grid_refinements);
    Ok(())
}
