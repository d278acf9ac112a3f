//! Eigenvalues of λ⁻¹(ω) by successive rank-one updates, against a dense
//! solve and the near-ω approximation.

use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::linalg::jacobi_eigen;
use point_billiard::rankone::{approximate_from, reduce_decomposition, SigmaDecomposition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 5000;
    let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n_max)?);
    let set = ScattererSet::new(
        vec![Point::new(0.3137, 0.5279), Point::new(0.7412, 1.1093), Point::new(0.55, 0.21)],
        vec![0.8, -0.3, 1.2],
        1.0,
    );
    let greens = Greens::new(table.clone(), set)?;
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);
    let e = table.energies();
    let omega = 0.5 * (e[1200] + e[1201]);

    let decomp = SigmaDecomposition::new(&greens, omega, &acc)?;
    let summary = reduce_decomposition(&decomp)?;
    let dense = jacobi_eigen(&greens.lambda_inverse(omega, &acc)?);
    println!("ω = {omega:.6}");
    println!("rank-one: {:?}", summary.eigenvalues);
    println!("dense:    {:?}", dense.values.as_slice());
    println!(
        "{} steps, {} fallbacks, max trace defect {:.1e}, max orthogonality defect {:.1e}",
        summary.steps, summary.fallbacks, summary.max_trace_defect, summary.max_orthogonality_defect
    );

    for window in [4, 16, 64, 256] {
        let approx = approximate_from(&decomp, &greens, window);
        let dev = approx
            .eigenvalues()
            .iter()
            .zip(&summary.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("near window {window:>4}: max deviation {dev:.3e}");
    }
    if let Some(closed) = approximate_from(&decomp, &greens, 16).closed_form {
        println!("log-law diagonal: {closed:?}");
    }
    Ok(())
}
