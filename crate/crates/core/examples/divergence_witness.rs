//! Partial sums of the bare series for Ḡ drift like −(M/2π)·ln n; the
//! regularized ones settle.

use std::f64::consts::PI;
use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, ScattererSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = BilliardSpec::golden();
    let table = Arc::new(ModeTable::lowest(spec, 100_000)?);
    let greens = Greens::new(table.clone(), ScattererSet::single(Point::new(0.3137, 0.5279), 0.0, 1.0))?;
    let omega = table.energies()[0] - 5.0;
    let schedule = [1_000, 3_000, 10_000, 30_000, 100_000];

    let bare = greens.naive_series_divergence_witness(0, omega, &schedule)?;
    let reg = greens.regularized_partial_sums(0, omega, &schedule)?;
    println!("{:>7} {:>14} {:>14}", "n", "bare", "regularized");
    for ((n, b), r) in schedule.iter().zip(&bare).zip(&reg) {
        println!("{n:>7} {b:>14.6} {r:>14.6}");
    }
    let slope = (bare[4] - bare[0]) / (schedule[4] as f64 / schedule[0] as f64).ln();
    println!("slope per ln n: {slope:.4} (expected {:.4})", -spec.mass / (2.0 * PI));
    Ok(())
}
