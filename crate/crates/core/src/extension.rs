//! Self-adjoint extension bookkeeping.
//!
//! A single scatterer is parameterized either by its inverse coupling
//! `v̄⁻¹` or by the extension angle θ:
//!
//! ```text
//! v̄⁻¹ = Λ·cot(θ/2)·Σ φ_n(x)² / (ε_n² + Λ²)
//! ```
//!
//! The unitary matrix of the extension is recovered from `λ⁻¹` sampled at
//! `±iΛ` via `U = −ᵗ[λ(−iΛ)·λ⁻¹(iΛ)]`; for one scatterer it equals `−e^{iθ}`
//! for every `Λ`. These are diagnostics only; the spectrum never needs `U`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{Greens, GreensAccuracy, SeriesValue};

/// Condition number above which `λ⁻¹(iΛ)` is treated as singular.
pub const MAX_CONDITION: f64 = 1e13;

/// Extension angle `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ThetaParameter(f64);

impl ThetaParameter {
    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..2.0 * PI).contains(&theta) {
            Ok(ThetaParameter(theta))
        } else {
            Err(Error::Contract(format!("theta must lie in [0, 2π), got {theta}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `−e^{iθ}`, the single-scatterer unitary.
    pub fn unitary(self) -> Complex64 {
        -Complex64::from_polar(1.0, self.0)
    }
}

/// `v̄_i⁻¹` for extension angle θ at scatterer `i`.
pub fn vbar_from_theta(greens: &Greens, theta: ThetaParameter, i: usize, acc: &GreensAccuracy) -> Result<SeriesValue> {
    if theta.0 == 0.0 {
        return Err(Error::EmptyBilliardLimit);
    }
    let weight = greens.spectral_weight(i, acc)?;
    let scale = greens.lambda() / (0.5 * theta.0).tan();
    Ok(SeriesValue {
        value: scale * weight.value,
        error_estimate: scale.abs() * weight.error_estimate,
    })
}

/// Inverse of [`vbar_from_theta`]: `θ = 2·arccot(v̄⁻¹ / (Λ·s))`, in `(0, 2π)`.
pub fn theta_from_vbar(greens: &Greens, vbar_inv: f64, i: usize, acc: &GreensAccuracy) -> Result<ThetaParameter> {
    if !vbar_inv.is_finite() {
        return Err(Error::EmptyBilliardLimit);
    }
    let weight = greens.spectral_weight(i, acc)?.value;
    let cot = vbar_inv / (greens.lambda() * weight);
    // arccot on (0, π)
    let half = 0.5 * PI - cot.atan();
    ThetaParameter::new(2.0 * half)
}

/// `λ⁻¹(ω)` at one complex energy.
#[derive(Debug, Clone)]
pub struct LambdaMatrixSample {
    pub omega: Complex64,
    pub matrix: DMatrix<Complex64>,
}

impl LambdaMatrixSample {
    pub fn evaluate(greens: &Greens, omega: Complex64, acc: &GreensAccuracy) -> Result<Self> {
        Ok(LambdaMatrixSample {
            omega,
            matrix: greens.lambda_inverse_complex(omega, acc)?,
        })
    }

    /// The pair of samples at `+iΛ` and `−iΛ`.
    pub fn at_plus_minus_i_lambda(greens: &Greens, acc: &GreensAccuracy) -> Result<(Self, Self)> {
        let lam = greens.lambda();
        Ok((
            Self::evaluate(greens, Complex64::new(0.0, lam), acc)?,
            Self::evaluate(greens, Complex64::new(0.0, -lam), acc)?,
        ))
    }

    /// `‖A·A† − A†·A‖_max` for `A = λ⁻¹(ω)`; zero iff the sample is normal.
    pub fn normality_defect(&self) -> f64 {
        let a = &self.matrix;
        let ah = a.adjoint();
        max_abs(&(a * &ah - &ah * a))
    }
}

/// The extension unitary and how far it is from unitary.
#[derive(Debug, Clone)]
pub struct UnitarityReport {
    pub u: DMatrix<Complex64>,
    /// `‖U†U − 1‖_max`.
    pub defect: f64,
    /// `U` itself when it is `1×1`.
    pub phase: Option<Complex64>,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Builds `U = −ᵗ[λ(−iΛ)·λ⁻¹(iΛ)]` and measures its unitarity defect.
pub fn unitarity_defect(sample_plus: &LambdaMatrixSample, sample_minus: &LambdaMatrixSample) -> Result<UnitarityReport> {
    let n = sample_plus.matrix.nrows();
    if sample_minus.matrix.nrows() != n {
        return Err(Error::Contract("samples differ in size".into()));
    }
    if (sample_plus.omega + sample_minus.omega).norm() > 1e-12 * sample_plus.omega.norm()
        || sample_plus.omega.im <= 0.0
        || sample_plus.omega.re != 0.0
    {
        return Err(Error::Contract(format!(
            "samples must sit at ±iΛ, got {} and {}",
            sample_plus.omega, sample_minus.omega
        )));
    }
    for s in [sample_plus, sample_minus] {
        let cond = condition_number(&s.matrix);
        if !(cond < MAX_CONDITION) {
            return Err(Error::IllConditioned(format!(
                "λ⁻¹({}) has condition number {cond:e}",
                s.omega
            )));
        }
    }
    let lambda_minus = sample_minus
        .matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("λ⁻¹(−iΛ) is singular".into()))?;
    let u = -(lambda_minus * &sample_plus.matrix).transpose();
    let defect = max_abs(&(u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)));
    let phase = (n == 1).then(|| u[(0, 0)]);
    Ok(UnitarityReport { u, defect, phase })
}

/// `‖λ⁻¹(ω)† − λ⁻¹(ω̄)‖_max`; vanishes because every term conjugates exactly.
pub fn hermitian_conjugation_check(greens: &Greens, omega: Complex64, acc: &GreensAccuracy) -> Result<f64> {
    let a = greens.lambda_inverse_complex(omega, acc)?;
    let b = greens.lambda_inverse_complex(omega.conj(), acc)?;
    Ok(max_abs(&(a.adjoint() - b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BilliardSpec, ModeTable, Point};
    use crate::greens::{ScattererSet, TailMode};
    use std::sync::Arc;

    fn single(n: usize, vbar_inv: f64, lambda: f64) -> Greens {
        let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n).unwrap());
        Greens::new(table, ScattererSet::single(Point::new(0.3137, 0.5279), vbar_inv, lambda)).unwrap()
    }

    #[test]
    fn theta_pi_gives_zero_coupling() {
        let g = single(1000, 0.0, 1.0);
        let acc = GreensAccuracy::new(1000, TailMode::Integral);
        let v = vbar_from_theta(&g, ThetaParameter::new(PI).unwrap(), 0, &acc).unwrap();
        assert!(v.value.abs() < 1e-16);
    }

    #[test]
    fn theta_zero_is_rejected() {
        let g = single(100, 0.0, 1.0);
        let acc = GreensAccuracy::new(100, TailMode::Integral);
        assert_eq!(
            vbar_from_theta(&g, ThetaParameter::new(0.0).unwrap(), 0, &acc),
            Err(Error::EmptyBilliardLimit)
        );
        assert!(ThetaParameter::new(2.0 * PI).is_err());
        assert!(ThetaParameter::new(-0.1).is_err());
    }

    #[test]
    fn coupling_monotone_in_theta() {
        let g = single(1000, 0.0, 1.0);
        let acc = GreensAccuracy::new(1000, TailMode::Integral);
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let theta = ThetaParameter::new(2.0 * PI * k as f64 / 200.0).unwrap();
            let v = vbar_from_theta(&g, theta, 0, &acc).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn singular_sample_is_reported() {
        let zero = LambdaMatrixSample {
            omega: Complex64::new(0.0, 1.0),
            matrix: DMatrix::zeros(1, 1),
        };
        let minus = LambdaMatrixSample {
            omega: Complex64::new(0.0, -1.0),
            matrix: DMatrix::zeros(1, 1),
        };
        assert!(matches!(unitarity_defect(&zero, &minus), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn real_axis_sample_is_real_symmetric() {
        let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), 2000).unwrap());
        let set = ScattererSet::new(
            vec![Point::new(0.31, 0.52), Point::new(0.77, 1.21)],
            vec![0.4, -0.2],
            1.0,
        );
        let g = Greens::new(table, set).unwrap();
        let acc = GreensAccuracy::new(2000, TailMode::Integral);
        let d = hermitian_conjugation_check(&g, Complex64::new(37.5, 0.0), &acc).unwrap();
        assert_eq!(d, 0.0);
        let m = g.lambda_inverse_complex(Complex64::new(37.5, 0.0), &acc).unwrap();
        assert!(m.iter().all(|z| z.im == 0.0));
    }
}
