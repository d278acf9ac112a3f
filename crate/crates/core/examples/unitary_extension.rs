//! The extension unitary U for one scatterer and for a mirror pair.

use std::sync::Arc;

use num_complex::Complex64;
use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::extension::{
    hermitian_conjugation_check, theta_from_vbar, unitarity_defect, vbar_from_theta, LambdaMatrixSample,
    ThetaParameter,
};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = 20_000;
    let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n_max)?);
    let acc = GreensAccuracy::new(n_max, TailMode::Integral);
    let theta = ThetaParameter::new(2.0)?;

    for lambda in [0.5, 1.0, 5.0, 20.0] {
        let probe = Greens::new(table.clone(), ScattererSet::single(Point::new(0.3137, 0.5279), 0.0, lambda))?;
        let v = vbar_from_theta(&probe, theta, 0, &acc)?.value;
        let g = probe.with_inverse_couplings(vec![v])?;
        let (plus, minus) = LambdaMatrixSample::at_plus_minus_i_lambda(&g, &acc)?;
        let u = unitarity_defect(&plus, &minus)?.phase.unwrap_or_default();
        let back = theta_from_vbar(&g, v, 0, &acc)?.value();
        println!("Λ={lambda:<5} v̄⁻¹={v:>10.5}  U={u:.12}  θ back={back:.12}");
    }
    println!("−e^(iθ)      = {:.12}", theta.unitary());

    let pair = ScattererSet::new(vec![Point::new(0.21, 0.67), Point::new(0.79, 0.67)], vec![0.4, 0.4], 1.0);
    let g = Greens::new(table.clone(), pair)?;
    let (plus, minus) = LambdaMatrixSample::at_plus_minus_i_lambda(&g, &acc)?;
    let report = unitarity_defect(&plus, &minus)?;
    println!("\nmirror pair: ‖U†U − 1‖ = {:.2e}, normality defect {:.2e}", report.defect, plus.normality_defect());
    let conj = hermitian_conjugation_check(&g, Complex64::new(1.0, 2.0), &acc)?;
    println!("conjugation defect at 1+2i: {conj:.2e}");
    Ok(())
}
