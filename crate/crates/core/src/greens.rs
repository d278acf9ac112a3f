//! Regularized Green's functions of the empty rectangle at scatterer sites.
//!
//! Everything here is a truncated eigenfunction series over a [`ModeTable`]:
//!
//! ```text
//! Ḡ_i(ω)   = Σ φ_n(x_i)² · (1/(ω − ε_n) + ε_n/(ε_n² + Λ²))
//! G⁰_ij(ω) = Σ φ_n(x_i)·φ_n(x_j) / (ω − ε_n)          (i ≠ j)
//! ```
//!
//! With [`TailMode::Integral`] the diagonal series is completed above the
//! cutoff `E_c = ε_{n_max}` by replacing `φ_n(x_i)²` with its mean `1/S` and
//! integrating against the Weyl density, which gives the closed-form
//! remainder `(M/2π)·ln(|ω − E_c| / √(E_c² + Λ²))`. The off-diagonal series
//! only converges conditionally; in that mode it is evaluated as the mean of
//! the partial sums over the top quarter of the truncation (a Cesàro taper),
//! and its error estimate is the spread of three block means.
//!
//! With [`TailMode::None`] every element is the plain truncated sum, i.e. the
//! matrix `Σ⁽⁰⁾(ω)` that the rank-one reduction diagonalizes.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{eigenfunction_unchecked, ModeTable, Point};
use crate::error::{Error, Result};

/// Fraction of the truncation (counted from the top) over which partial
/// sums of the off-diagonal series are averaged.
pub const OFFDIAG_TAPER_FRACTION: f64 = 0.25;

/// Number of blocks used for the off-diagonal spread estimate.
pub const OFFDIAG_BLOCKS: usize = 3;

/// Default pole-exclusion half-width in units of the mean level spacing.
pub const DEFAULT_POLE_EXCLUSION: f64 = 1e-9;

/// Scatterer positions, inverse couplings `v̄_i⁻¹` and the mass scale `Λ`.
///
/// Couplings are stored as `v̄⁻¹` because that is the quantity entering
/// every formula; `v̄⁻¹ = 0` (θ = π) is an ordinary configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSet {
    pub positions: Vec<Point>,
    pub inverse_couplings: Vec<f64>,
    pub lambda: f64,
}

impl ScattererSet {
    pub fn new(positions: Vec<Point>, inverse_couplings: Vec<f64>, lambda: f64) -> Self {
        ScattererSet {
            positions,
            inverse_couplings,
            lambda,
        }
    }

    pub fn single(position: Point, inverse_coupling: f64, lambda: f64) -> Self {
        Self::new(vec![position], vec![inverse_coupling], lambda)
    }

    pub fn empty(lambda: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), lambda)
    }

    /// Builds the set from couplings `v̄_i` rather than their inverses.
    pub fn from_couplings(positions: Vec<Point>, couplings: &[f64], lambda: f64) -> Result<Self> {
        if let Some(bad) = couplings.iter().find(|v| **v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidScatterers(format!(
                "coupling must be nonzero and finite, got {bad}"
            )));
        }
        Ok(Self::new(
            positions,
            couplings.iter().map(|v| 1.0 / v).collect(),
            lambda,
        ))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_inverse_couplings(&self, inverse_couplings: Vec<f64>) -> Self {
        ScattererSet {
            inverse_couplings,
            ..self.clone()
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn problems(&self, spec: &crate::basis::BilliardSpec) -> Vec<String> {
        let mut out = Vec::new();
        if self.positions.len() != self.inverse_couplings.len() {
            out.push(format!(
                "{} positions but {} couplings",
                self.positions.len(),
                self.inverse_couplings.len()
            ));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            out.push(format!("lambda must be positive and finite, got {}", self.lambda));
        }
        for (i, p) in self.positions.iter().enumerate() {
            if !spec.contains_interior(p) {
                out.push(format!("scatterer {i} at ({}, {}) is not strictly interior", p.x, p.y));
            }
            for (j, q) in self.positions.iter().enumerate().skip(i + 1) {
                if p == q {
                    out.push(format!("scatterers {i} and {j} coincide"));
                }
            }
        }
        for (i, v) in self.inverse_couplings.iter().enumerate() {
            if !v.is_finite() {
                out.push(format!("inverse coupling {i} must be finite, got {v}"));
            }
        }
        out
    }

    pub fn validate(&self, spec: &crate::basis::BilliardSpec) -> Result<()> {
        let problems = self.problems(spec);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScatterers(problems.join("; ")))
        }
    }

    /// Scatterers sitting on a line `x/Lx = p/q` or `y/Ly = p/q` with small
    /// `q`, where many eigenfunctions vanish and `⟨φ²⟩ = 1/S` fails.
    pub fn symmetry_warnings(&self, spec: &crate::basis::BilliardSpec) -> Vec<String> {
        const MAX_DENOMINATOR: u32 = 6;
        let on_rational = |t: f64| -> Option<(u32, u32)> {
            (2..=MAX_DENOMINATOR).find_map(|q| {
                let p = (t * q as f64).round();
                ((t * q as f64 - p).abs() < 1e-9).then_some((p as u32, q))
            })
        };
        let mut out = Vec::new();
        for (i, pos) in self.positions.iter().enumerate() {
            if let Some((p, q)) = on_rational(pos.x / spec.lx) {
                out.push(format!("scatterer {i} lies on the symmetry line x = {p}/{q} Lx"));
            }
            if let Some((p, q)) = on_rational(pos.y / spec.ly) {
                out.push(format!("scatterer {i} lies on the symmetry line y = {p}/{q} Ly"));
            }
        }
        out
    }
}

/// How the truncated series is completed above the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    /// Plain truncated sums.
    None,
    /// Analytic integral tail on the diagonal, tapered off-diagonal sums.
    #[default]
    Integral,
}

/// Truncation policy for every series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensAccuracy {
    pub n_max: usize,
    pub tail: TailMode,
    pub target_abs_err: f64,
    /// Minimum distance from any `ε_n`, in units of the mean spacing.
    #[serde(default = "default_pole_exclusion")]
    pub pole_exclusion: f64,
}

fn default_pole_exclusion() -> f64 {
    DEFAULT_POLE_EXCLUSION
}

impl Default for GreensAccuracy {
    fn default() -> Self {
        GreensAccuracy {
            n_max: 100_000,
            tail: TailMode::Integral,
            target_abs_err: 1e-4,
            pole_exclusion: DEFAULT_POLE_EXCLUSION,
        }
    }
}

impl GreensAccuracy {
    pub fn new(n_max: usize, tail: TailMode) -> Self {
        GreensAccuracy {
            n_max,
            tail,
            ..Default::default()
        }
    }

    pub fn truncated(n_max: usize) -> Self {
        Self::new(n_max, TailMode::None)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_max < 1 {
            out.push("n_max must be at least 1".to_string());
        }
        if !(self.target_abs_err.is_finite() && self.target_abs_err > 0.0) {
            out.push(format!("target_abs_err must be positive, got {}", self.target_abs_err));
        }
        if !(self.pole_exclusion.is_finite() && self.pole_exclusion >= 0.0) {
            out.push(format!("pole_exclusion must be non-negative, got {}", self.pole_exclusion));
        }
        out
    }
}

/// A series value with its estimated absolute truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// `φ_n(x_i)` for every scatterer and every tabulated mode, computed once.
#[derive(Debug, Clone)]
pub struct SeriesTermSource {
    table: Arc<ModeTable>,
    values: Vec<Vec<f64>>,
}

impl SeriesTermSource {
    pub fn new(table: Arc<ModeTable>, positions: &[Point]) -> Self {
        let spec = *table.spec();
        let values = positions
            .iter()
            .map(|p| {
                table
                    .modes()
                    .iter()
                    .map(|m| eigenfunction_unchecked(&spec, m.mx, m.my, p))
                    .collect()
            })
            .collect();
        SeriesTermSource { table, values }
    }

    pub fn table(&self) -> &ModeTable {
        &self.table
    }

    pub fn table_arc(&self) -> &Arc<ModeTable> {
        &self.table
    }

    /// `φ_n(x_i)` for all tabulated `n`.
    pub fn values(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn scatterer_count(&self) -> usize {
        self.values.len()
    }
}

/// Green's function evaluator for a fixed billiard and scatterer set.
#[derive(Debug, Clone)]
pub struct Greens {
    source: SeriesTermSource,
    scatterers: ScattererSet,
}

// Regularized diagonal summand, written so the O(1/ε) pieces cancel
// analytically: 1/(ω−ε) + ε/(ε²+Λ²) = (Λ² + εω) / ((ω−ε)(ε²+Λ²)).
#[inline]
fn regularized_kernel(omega: f64, e: f64, lambda_sq: f64) -> f64 {
    (lambda_sq + e * omega) / ((omega - e) * (e * e + lambda_sq))
}

#[inline]
fn counterterm(e: f64, lambda_sq: f64) -> f64 {
    e / (e * e + lambda_sq)
}

// 1/(ω−ε) with a conjugation-symmetric rounding pattern.
#[inline]
fn complex_resolvent(omega: Complex64, e: f64) -> Complex64 {
    let a = omega.re - e;
    let b = omega.im;
    let d = a * a + b * b;
    Complex64::new(a / d, -b / d)
}

impl Greens {
    pub fn new(table: Arc<ModeTable>, scatterers: ScattererSet) -> Result<Self> {
        scatterers.validate(table.spec())?;
        let source = SeriesTermSource::new(table, &scatterers.positions);
        Ok(Greens { source, scatterers })
    }

    /// Replaces the couplings while keeping the cached eigenfunction values.
    pub fn with_inverse_couplings(&self, inverse_couplings: Vec<f64>) -> Result<Self> {
        if inverse_couplings.len() != self.scatterers.len() {
            return Err(Error::InvalidScatterers("coupling count mismatch".into()));
        }
        Ok(Greens {
            source: self.source.clone(),
            scatterers: self.scatterers.with_inverse_couplings(inverse_couplings),
        })
    }

    pub fn table(&self) -> &ModeTable {
        self.source.table()
    }

    pub fn table_arc(&self) -> &Arc<ModeTable> {
        self.source.table_arc()
    }

    pub fn source(&self) -> &SeriesTermSource {
        &self.source
    }

    pub fn scatterers(&self) -> &ScattererSet {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.scatterers.lambda
    }

    /// `⟨φ²⟩·ρ_av = M / 2π`, the smooth local density at an interior point.
    pub fn local_density(&self) -> f64 {
        let spec = self.table().spec();
        spec.weyl_density() / spec.area()
    }

    pub fn check_accuracy(&self, acc: &GreensAccuracy) -> Result<()> {
        let mut problems = acc.problems();
        if acc.n_max > self.table().len() {
            problems.push(format!(
                "n_max={} exceeds the {} tabulated modes",
                acc.n_max,
                self.table().len()
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAccuracy(problems.join("; ")))
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::Contract(format!(
                "scatterer index {i} out of range for {} scatterers",
                self.len()
            )));
        }
        Ok(())
    }

    /// Fails if `omega` is within the exclusion band of a tabulated level.
    pub fn check_pole_distance(&self, omega: f64, acc: &GreensAccuracy) -> Result<()> {
        let table = self.table();
        let n = table.nearest_level(omega, acc.n_max);
        let pole = table.energies()[n];
        let distance = (omega - pole).abs();
        let band = acc.pole_exclusion * table.spec().mean_spacing();
        if distance < band {
            return Err(Error::PoleProximity {
                omega,
                pole,
                index: n + 1,
                distance,
            });
        }
        Ok(())
    }

    fn cutoff(&self, acc: &GreensAccuracy) -> f64 {
        self.table().energies()[acc.n_max - 1]
    }

    /// Closed-form remainder of the diagonal series above the cutoff.
    pub fn diagonal_tail(&self, omega: f64, acc: &GreensAccuracy) -> f64 {
        match acc.tail {
            TailMode::None => 0.0,
            TailMode::Integral => {
                let ec = self.cutoff(acc);
                let lam = self.lambda();
                self.local_density() * ((omega - ec).abs().ln() - 0.5 * (ec * ec + lam * lam).ln())
            }
        }
    }

    fn diagonal_tail_derivative(&self, omega: f64, acc: &GreensAccuracy) -> f64 {
        match acc.tail {
            TailMode::None => 0.0,
            TailMode::Integral => self.local_density() / (omega - self.cutoff(acc)),
        }
    }

    fn diagonal_tail_complex(&self, omega: Complex64, acc: &GreensAccuracy) -> Complex64 {
        match acc.tail {
            TailMode::None => Complex64::new(0.0, 0.0),
            TailMode::Integral => {
                let ec = self.cutoff(acc);
                let lam = self.lambda();
                (Complex64::new(ec, 0.0) - omega).ln().scale(self.local_density())
                    - Complex64::new(0.5 * self.local_density() * (ec * ec + lam * lam).ln(), 0.0)
            }
        }
    }

    // Size of the weighted-count fluctuation at the cutoff times the summand
    // there; a heuristic bound on what the integral tail misses.
    fn boundary_error(&self, kernel_at_cutoff: f64, acc: &GreensAccuracy) -> f64 {
        let area = self.table().spec().area();
        (acc.n_max as f64).sqrt() / area * kernel_at_cutoff.abs()
    }

    pub(crate) fn g_bar_unchecked(&self, i: usize, omega: f64, acc: &GreensAccuracy) -> f64 {
        let lambda_sq = self.lambda() * self.lambda();
        let phi = &self.source.values(i)[..acc.n_max];
        let energies = &self.table().energies()[..acc.n_max];
        let mut sum = 0.0;
        for (p, &e) in phi.iter().zip(energies) {
            sum += p * p * regularized_kernel(omega, e, lambda_sq);
        }
        sum + self.diagonal_tail(omega, acc)
    }

    /// Regularized diagonal Green's function `Ḡ_i(ω)`.
    pub fn g_bar(&self, i: usize, omega: f64, acc: &GreensAccuracy) -> Result<SeriesValue> {
        self.check_index(i)?;
        self.check_accuracy(acc)?;
        self.check_pole_distance(omega, acc)?;
        let value = self.g_bar_unchecked(i, omega, acc);
        let lambda_sq = self.lambda() * self.lambda();
        let kernel = regularized_kernel(omega, self.cutoff(acc), lambda_sq);
        let error_estimate = match acc.tail {
            TailMode::None => self.diagonal_tail_of(omega, acc).abs() + self.boundary_error(kernel, acc),
            TailMode::Integral => self.boundary_error(kernel, acc),
        };
        Ok(SeriesValue {
            value,
            error_estimate,
        })
    }

    fn diagonal_tail_of(&self, omega: f64, acc: &GreensAccuracy) -> f64 {
        self.diagonal_tail(
            omega,
            &GreensAccuracy {
                tail: TailMode::Integral,
                ..*acc
            },
        )
    }

    pub(crate) fn g_bar_derivative_unchecked(&self, i: usize, omega: f64, acc: &GreensAccuracy) -> f64 {
        let phi = &self.source.values(i)[..acc.n_max];
        let energies = &self.table().energies()[..acc.n_max];
        let mut sum = 0.0;
        for (p, &e) in phi.iter().zip(energies) {
            let r = p / (omega - e);
            sum += r * r;
        }
        -sum + self.diagonal_tail_derivative(omega, acc)
    }

    /// `Ḡ_i'(ω) = −Σ φ_n(x_i)² / (ω − ε_n)²`, always negative.
    pub fn g_bar_derivative(&self, i: usize, omega: f64, acc: &GreensAccuracy) -> Result<SeriesValue> {
        self.check_index(i)?;
        self.check_accuracy(acc)?;
        self.check_pole_distance(omega, acc)?;
        let value = self.g_bar_derivative_unchecked(i, omega, acc);
        let ec = self.cutoff(acc);
        let remainder = self.local_density() / (ec - omega).abs();
        let error_estimate = match acc.tail {
            TailMode::None => remainder,
            TailMode::Integral => self.boundary_error(1.0 / ((ec - omega) * (ec - omega)), acc),
        };
        Ok(SeriesValue {
            value,
            error_estimate,
        })
    }

    /// Index of the first mode inside the off-diagonal taper window.
    pub(crate) fn taper_start(&self, acc: &GreensAccuracy) -> usize {
        match acc.tail {
            TailMode::None => acc.n_max,
            TailMode::Integral => {
                let ec = self.cutoff(acc);
                let ea = (1.0 - OFFDIAG_TAPER_FRACTION) * ec;
                self.table().energies()[..acc.n_max]
                    .partition_point(|&e| e < ea)
                    .min(acc.n_max - 1)
            }
        }
    }

    /// Weight of mode `n` in the tapered sum: the fraction of averaged
    /// partial sums `S_m`, `m ∈ [a, n_max)`, that contain term `n`.
    #[inline]
    pub(crate) fn taper_weight(n: usize, start: usize, n_max: usize) -> f64 {
        if n <= start {
            1.0
        } else {
            (n_max - n) as f64 / (n_max - start) as f64
        }
    }

    /// Free Green's function `G⁰_ij(ω)` between two distinct scatterers.
    pub fn g0_offdiag(&self, i: usize, j: usize, omega: f64, acc: &GreensAccuracy) -> Result<SeriesValue> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::Contract(
                "g0_offdiag needs distinct scatterers; use g_bar for the diagonal".into(),
            ));
        }
        self.check_accuracy(acc)?;
        self.check_pole_distance(omega, acc)?;
        Ok(self.g0_offdiag_unchecked(i, j, omega, acc))
    }

    pub(crate) fn g0_offdiag_unchecked(&self, i: usize, j: usize, omega: f64, acc: &GreensAccuracy) -> SeriesValue {
        // Iterate in a symmetric order so (i, j) and (j, i) agree bit-for-bit.
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let pa = &self.source.values(a)[..acc.n_max];
        let pb = &self.source.values(b)[..acc.n_max];
        let energies = &self.table().energies()[..acc.n_max];
        let n_max = acc.n_max;
        let start = self.taper_start(acc);

        let mut partial = 0.0;
        let mut tapered = 0.0;
        let block_len = ((n_max - start) / OFFDIAG_BLOCKS).max(1);
        let mut block_sums = [0.0; OFFDIAG_BLOCKS];
        let mut block_counts = [0usize; OFFDIAG_BLOCKS];
        for n in 0..n_max {
            let term = pa[n] * pb[n] / (omega - energies[n]);
            partial += term;
            tapered += Self::taper_weight(n, start, n_max) * term;
            if n >= start {
                let blk = ((n - start) / block_len).min(OFFDIAG_BLOCKS - 1);
                block_sums[blk] += partial;
                block_counts[blk] += 1;
            }
        }
        let means: Vec<f64> = block_sums
            .iter()
            .zip(&block_counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let spread = if means.len() > 1 {
            let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
            hi - lo
        } else {
            0.0
        };
        let value = match acc.tail {
            TailMode::None => partial,
            TailMode::Integral => tapered,
        };
        SeriesValue {
            value,
            error_estimate: spread,
        }
    }

    /// Partial sums of the unregularized diagonal series `Σ φ_n²/(ω − ε_n)`
    /// at each truncation in `schedule`. For `ω < ε_1` they decrease without
    /// bound, logarithmically in the cutoff energy.
    pub fn naive_series_divergence_witness(&self, i: usize, omega: f64, schedule: &[usize]) -> Result<Vec<f64>> {
        self.partial_sums(i, omega, schedule, false)
    }

    /// Same schedule with the counterterm `ε_n/(ε_n² + Λ²)` included.
    pub fn regularized_partial_sums(&self, i: usize, omega: f64, schedule: &[usize]) -> Result<Vec<f64>> {
        self.partial_sums(i, omega, schedule, true)
    }

    fn partial_sums(&self, i: usize, omega: f64, schedule: &[usize], regularize: bool) -> Result<Vec<f64>> {
        self.check_index(i)?;
        let len = self.table().len();
        if schedule.windows(2).any(|w| w[0] > w[1]) || schedule.iter().any(|&n| n == 0 || n > len) {
            return Err(Error::Contract(format!(
                "schedule must be nondecreasing within 1..={len}"
            )));
        }
        let lambda_sq = self.lambda() * self.lambda();
        let phi = self.source.values(i);
        let energies = self.table().energies();
        let mut out = Vec::with_capacity(schedule.len());
        let mut sum = 0.0;
        let mut n = 0;
        for &stop in schedule {
            while n < stop {
                let e = energies[n];
                let k = if regularize {
                    regularized_kernel(omega, e, lambda_sq)
                } else {
                    1.0 / (omega - e)
                };
                sum += phi[n] * phi[n] * k;
                n += 1;
            }
            out.push(sum);
        }
        Ok(out)
    }

    /// `Σ_n φ_n(x_i)² / (ε_n² + Λ²)`, with its integral tail when requested.
    pub fn spectral_weight(&self, i: usize, acc: &GreensAccuracy) -> Result<SeriesValue> {
        self.check_index(i)?;
        self.check_accuracy(acc)?;
        let lam = self.lambda();
        let lambda_sq = lam * lam;
        let phi = &self.source.values(i)[..acc.n_max];
        let energies = &self.table().energies()[..acc.n_max];
        let mut sum = 0.0;
        for (p, &e) in phi.iter().zip(energies) {
            sum += p * p / (e * e + lambda_sq);
        }
        let ec = self.cutoff(acc);
        let tail = self.local_density() * (0.5 * PI - (ec / lam).atan()) / lam;
        Ok(match acc.tail {
            TailMode::None => SeriesValue {
                value: sum,
                error_estimate: tail,
            },
            TailMode::Integral => SeriesValue {
                value: sum + tail,
                error_estimate: self.boundary_error(1.0 / (ec * ec + lambda_sq), acc),
            },
        })
    }

    /// `Ḡ_i(ω)` at complex energy. No pole check is needed off the axis.
    pub fn g_bar_complex(&self, i: usize, omega: Complex64, acc: &GreensAccuracy) -> Result<Complex64> {
        self.check_index(i)?;
        self.check_accuracy(acc)?;
        let lambda_sq = self.lambda() * self.lambda();
        let phi = &self.source.values(i)[..acc.n_max];
        let energies = &self.table().energies()[..acc.n_max];
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, &e) in phi.iter().zip(energies) {
            let r = complex_resolvent(omega, e);
            sum += (r + counterterm(e, lambda_sq)).scale(p * p);
        }
        Ok(sum + self.diagonal_tail_complex(omega, acc))
    }

    /// The matrix `λ⁻¹(ω)`: `Ḡ_i − v̄_i⁻¹` on the diagonal, `G⁰_ij` off it.
    pub fn lambda_inverse(&self, omega: f64, acc: &GreensAccuracy) -> Result<DMatrix<f64>> {
        self.check_accuracy(acc)?;
        self.check_pole_distance(omega, acc)?;
        Ok(self.lambda_inverse_unchecked(omega, acc, false).0)
    }

    /// `λ⁻¹(ω)` together with its ω-derivative.
    pub fn lambda_inverse_with_derivative(
        &self,
        omega: f64,
        acc: &GreensAccuracy,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        self.check_accuracy(acc)?;
        self.check_pole_distance(omega, acc)?;
        let (m, d) = self.lambda_inverse_unchecked(omega, acc, true);
        Ok((m, d.expect("derivative requested")))
    }

    pub(crate) fn lambda_inverse_unchecked(
        &self,
        omega: f64,
        acc: &GreensAccuracy,
        with_derivative: bool,
    ) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        let n_sc = self.len();
        let lambda_sq = self.lambda() * self.lambda();
        let energies = &self.table().energies()[..acc.n_max];
        let start = self.taper_start(acc);
        let n_max = acc.n_max;
        let phis: Vec<&[f64]> = (0..n_sc).map(|i| self.source.values(i)).collect();

        let mut m = DMatrix::<f64>::zeros(n_sc, n_sc);
        let mut d = DMatrix::<f64>::zeros(n_sc, n_sc);
        let mut v = vec![0.0; n_sc];
        for (n, &e) in energies.iter().enumerate() {
            let r = 1.0 / (omega - e);
            let kernel = regularized_kernel(omega, e, lambda_sq);
            let w = if acc.tail == TailMode::Integral {
                Self::taper_weight(n, start, n_max)
            } else {
                1.0
            };
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = phis[i][n];
            }
            for i in 0..n_sc {
                m[(i, i)] += v[i] * v[i] * kernel;
                if with_derivative {
                    d[(i, i)] -= v[i] * v[i] * r * r;
                }
                for j in (i + 1)..n_sc {
                    let t = v[i] * v[j] * r;
                    m[(i, j)] += w * t;
                    if with_derivative {
                        d[(i, j)] -= w * t * r;
                    }
                }
            }
        }
        let tail = self.diagonal_tail(omega, acc);
        let tail_d = self.diagonal_tail_derivative(omega, acc);
        for i in 0..n_sc {
            m[(i, i)] += tail - self.scatterers.inverse_couplings[i];
            d[(i, i)] += tail_d;
            for j in (i + 1)..n_sc {
                m[(j, i)] = m[(i, j)];
                d[(j, i)] = d[(i, j)];
            }
        }
        (m, with_derivative.then_some(d))
    }

    /// `λ⁻¹(ω)` at complex energy.
    pub fn lambda_inverse_complex(&self, omega: Complex64, acc: &GreensAccuracy) -> Result<DMatrix<Complex64>> {
        self.check_accuracy(acc)?;
        let n_sc = self.len();
        let lambda_sq = self.lambda() * self.lambda();
        let energies = &self.table().energies()[..acc.n_max];
        let start = self.taper_start(acc);
        let n_max = acc.n_max;

        let mut m = DMatrix::<Complex64>::zeros(n_sc, n_sc);
        for (n, &e) in energies.iter().enumerate() {
            let r = complex_resolvent(omega, e);
            let c = counterterm(e, lambda_sq);
            let w = if acc.tail == TailMode::Integral {
                Self::taper_weight(n, start, n_max)
            } else {
                1.0
            };
            for i in 0..n_sc {
                let vi = self.source.values(i)[n];
                m[(i, i)] += (r + c).scale(vi * vi);
                for j in (i + 1)..n_sc {
                    let vj = self.source.values(j)[n];
                    m[(i, j)] += r.scale(w * vi * vj);
                }
            }
        }
        let tail = self.diagonal_tail_complex(omega, acc);
        for i in 0..n_sc {
            m[(i, i)] += tail - Complex64::new(self.scatterers.inverse_couplings[i], 0.0);
            for j in (i + 1)..n_sc {
                m[(j, i)] = m[(i, j)];
            }
        }
        Ok(m)
    }
}
