//! Level statistics: unfolding, spacing distributions, reference laws, the
//! strong-coupling band, and the survey of `Ḡ` at its inflection points.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BilliardSpec, ModeTable};
use crate::error::{Error, Result};
use crate::greens::{Greens, GreensAccuracy, ScattererSet};
use crate::roots::brent;
use crate::solver::{EnergyWindow, PoleStructure};

/// Levels below this index are left out of statistics by default.
pub const DEFAULT_EXCLUDED_LEVELS: usize = 200;

/// Sample size below which histograms carry a warning.
pub const MIN_MEANINGFUL_SAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSpectrum {
    pub raw: Vec<f64>,
    /// Same order as `raw`, mean spacing one.
    pub unfolded: Vec<f64>,
    pub window: Option<EnergyWindow>,
}

impl UnfoldedSpectrum {
    pub fn spacings(&self) -> Vec<f64> {
        self.unfolded.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.unfolded.len();
        (self.unfolded[n - 1] - self.unfolded[0]) / (n - 1) as f64
    }
}

/// Constant-density unfolding: scale by the Weyl density, then rescale to
/// unit mean spacing exactly.
pub fn unfold(levels: &[f64], spec: &BilliardSpec) -> Result<UnfoldedSpectrum> {
    if levels.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            got: levels.len(),
        });
    }
    if let Some(w) = levels.windows(2).find(|w| !(w[1] >= w[0])) {
        return Err(Error::Contract(format!("levels not sorted: {} before {}", w[0], w[1])));
    }
    let rho = spec.weyl_density();
    let n = levels.len();
    let span = rho * (levels[n - 1] - levels[0]);
    if span <= 0.0 {
        return Err(Error::Contract("all levels coincide".into()));
    }
    let factor = rho * (n - 1) as f64 / span;
    Ok(UnfoldedSpectrum {
        raw: levels.to_vec(),
        unfolded: levels.iter().map(|l| l * factor).collect(),
        window: None,
    })
}

/// Levels at or above the energy of unperturbed level `skip + 1`.
pub fn exclude_lowest(levels: &[f64], table: &ModeTable, skip: usize) -> Vec<f64> {
    match table.energies().get(skip) {
        Some(&floor) => levels.iter().cloned().filter(|&l| l >= floor).collect(),
        None => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub densities: Vec<f64>,
    pub sample_size: usize,
    pub warning: Option<String>,
}

/// Density-normalized histogram of consecutive unfolded spacings on
/// `[0, max spacing]`.
pub fn spacing_distribution(u: &UnfoldedSpectrum, bins: usize) -> Result<SpacingHistogram> {
    if bins == 0 {
        return Err(Error::Contract("histogram needs at least one bin".into()));
    }
    let s = u.spacings();
    let top = s.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &x in &s {
        let k = ((x / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = s.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let warning = (s.len() < MIN_MEANINGFUL_SAMPLE)
        .then(|| format!("only {} spacings; statistics are not meaningful", s.len()));
    Ok(SpacingHistogram {
        edges,
        counts,
        densities,
        sample_size: s.len(),
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// `P(S) = e^{−S}`
    Poisson,
    /// `P(S) = (πS/2)·e^{−πS²/4}`
    Goe,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Poisson => "poisson",
            ReferenceKind::Goe => "goe",
        }
    }
}

pub fn reference_cdf(kind: ReferenceKind, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeSpacing(s));
    }
    Ok(match kind {
        ReferenceKind::Poisson => -(-s).exp_m1(),
        ReferenceKind::Goe => -(-0.25 * PI * s * s).exp_m1(),
    })
}

pub fn reference_pdf(kind: ReferenceKind, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::NegativeSpacing(s));
    }
    Ok(match kind {
        ReferenceKind::Poisson => (-s).exp(),
        ReferenceKind::Goe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
    })
}

/// One-sample Kolmogorov–Smirnov distance to a reference law.
pub fn ks_distance(sample: &[f64], kind: ReferenceKind) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = reference_cdf(kind, x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// KS distances of an unfolded spectrum to both references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub spacings: usize,
    pub ks_poisson: f64,
    pub ks_goe: f64,
    pub closer_to: ReferenceKind,
}

pub fn compare_references(u: &UnfoldedSpectrum) -> Result<ReferenceComparison> {
    let s = u.spacings();
    let ks_poisson = ks_distance(&s, ReferenceKind::Poisson)?;
    let ks_goe = ks_distance(&s, ReferenceKind::Goe)?;
    Ok(ReferenceComparison {
        spacings: s.len(),
        ks_poisson,
        ks_goe,
        closer_to: if ks_goe < ks_poisson {
            ReferenceKind::Goe
        } else {
            ReferenceKind::Poisson
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPrediction {
    pub omega: f64,
    /// `(M/2π)·ln(ω/Λ)`
    pub vbar_inv_star: f64,
    /// `πM/4`
    pub half_width: f64,
    pub in_strong_band: Vec<bool>,
}

/// The inverse coupling a scatterer needs to disturb the spectrum most near
/// ω, and which scatterers of `config` are within the band.
pub fn predict_strong_coupling(config: &ScattererSet, spec: &BilliardSpec, omega: f64) -> Result<CouplingPrediction> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Contract(format!("prediction needs a positive energy, got {omega}")));
    }
    let star = spec.mass / (2.0 * PI) * (omega / config.lambda).ln();
    let half_width = PI * spec.mass / 4.0;
    // closed band; the slack absorbs rounding in star ± half_width
    let slack = 4.0 * f64::EPSILON * (star.abs() + half_width);
    let in_strong_band = config
        .inverse_couplings
        .iter()
        .map(|v| (v - star).abs() <= half_width + slack)
        .collect();
    Ok(CouplingPrediction {
        omega,
        vbar_inv_star: star,
        half_width,
        in_strong_band,
    })
}

/// Inverse coupling centred on ω: `(M/2π)·ln(ω/Λ)`.
pub fn band_center(spec: &BilliardSpec, lambda: f64, omega: f64) -> f64 {
    spec.mass / (2.0 * PI) * (omega / lambda).ln()
}

/// Energies over which a fixed `v̄⁻¹` stays in the strong band:
/// `[ω*·e^{−π²/2}, ω*·e^{π²/2}]` with `ω* = Λ·e^{2π v̄⁻¹ / M}`.
pub fn band_energy_range(spec: &BilliardSpec, lambda: f64, vbar_inv: f64) -> (f64, f64) {
    let center = lambda * (2.0 * PI * vbar_inv / spec.mass).exp();
    let spread = (0.5 * PI * PI).exp();
    (center / spread, center * spread)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflectionRow {
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub omega_tilde: f64,
    pub g_bar: f64,
    /// `(M/2π)·ln(ω̃/Λ)`
    pub log_law: f64,
    pub abs_derivative: f64,
}

impl InflectionRow {
    /// `|ω̃ − midpoint| / gap width`
    pub fn midpoint_offset(&self) -> f64 {
        (self.omega_tilde - 0.5 * (self.gap_lo + self.gap_hi)).abs() / (self.gap_hi - self.gap_lo)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InflectionSurvey {
    pub rows: Vec<InflectionRow>,
    pub notes: Vec<String>,
}

impl InflectionSurvey {
    /// Median of `Ḡ(ω̃) − (M/2π)·ln(ω̃/Λ)`.
    pub fn median_log_offset(&self) -> Option<f64> {
        median(self.rows.iter().map(|r| r.g_bar - r.log_law).collect())
    }

    /// Median of `|Ḡ'(ω̃)| / ρ_av`.
    pub fn median_width(&self, spec: &BilliardSpec) -> Option<f64> {
        let rho = spec.weyl_density();
        median(self.rows.iter().map(|r| r.abs_derivative / rho).collect())
    }

    pub fn median_midpoint_offset(&self) -> Option<f64> {
        median(self.rows.iter().map(|r| r.midpoint_offset()).collect())
    }
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Locates the inflection point of `Ḡ` in every gap inside `window` for a
/// single scatterer.
///
/// `Ḡ''` is the central difference of the analytic `Ḡ'` with step
/// `h = 10⁻³/ρ_av`; it is positive just above a pole and negative just
/// below the next one, and its zero is refined by Brent's method.
pub fn gbar_inflection_survey(greens: &Greens, window: &EnergyWindow, acc: &GreensAccuracy) -> Result<InflectionSurvey> {
    if greens.len() != 1 {
        return Err(Error::Contract("the inflection survey needs exactly one scatterer".into()));
    }
    greens.check_accuracy(acc)?;
    let spec = greens.table().spec();
    let h = 1e-3 / spec.weyl_density();
    let poles: Vec<f64> = PoleStructure::of(greens, acc.n_max)
        .poles
        .iter()
        .map(|&(e, _)| e)
        .filter(|&e| window.contains(e))
        .collect();
    let mut survey = InflectionSurvey::default();
    if poles.len() < 2 {
        survey.notes.push("no complete gap inside the window".into());
        return Ok(survey);
    }
    let second = |w: f64| {
        (greens.g_bar_derivative_unchecked(0, w + h, acc) - greens.g_bar_derivative_unchecked(0, w - h, acc))
            / (2.0 * h)
    };
    let outcomes: Vec<std::result::Result<InflectionRow, String>> = poles
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if b - a < 6.0 * h {
                return Err(format!("gap ({a}, {b}) narrower than the differencing stencil"));
            }
            let (lo, hi) = (a + 3.0 * h, b - 3.0 * h);
            let (flo, fhi) = (second(lo), second(hi));
            let found = brent(second, lo, hi, flo, fhi, 1e-10 * (b - a), 200)
                .ok_or_else(|| format!("no sign change of the second derivative in ({a}, {b})"))?;
            let x = found.root;
            Ok(InflectionRow {
                gap_lo: a,
                gap_hi: b,
                omega_tilde: x,
                g_bar: greens.g_bar_unchecked(0, x, acc),
                log_law: band_center(spec, greens.lambda(), x),
                abs_derivative: greens.g_bar_derivative_unchecked(0, x, acc).abs(),
            })
        })
        .collect();
    for o in outcomes {
        match o {
            Ok(row) => survey.rows.push(row),
            Err(note) => survey.notes.push(note),
        }
    }
    if survey.rows.len() < 30 {
        survey
            .notes
            .push(format!("only {} gaps surveyed; medians are rough", survey.rows.len()));
    }
    Ok(survey)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cdfs() {
        for k in [ReferenceKind::Poisson, ReferenceKind::Goe] {
            assert_eq!(reference_cdf(k, 0.0).unwrap(), 0.0);
            assert!(matches!(reference_cdf(k, -0.1), Err(Error::NegativeSpacing(_))));
        }
        assert!((reference_cdf(ReferenceKind::Poisson, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        let s = 2.0 / PI.sqrt() * 2f64.ln().sqrt();
        assert!((reference_cdf(ReferenceKind::Goe, s).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_spacing_unfolds_to_one() {
        let spec = BilliardSpec::golden();
        let step = 1.0 / spec.weyl_density();
        let levels: Vec<f64> = (0..50).map(|k| 100.0 + k as f64 * step).collect();
        let u = unfold(&levels, &spec).unwrap();
        for s in u.spacings() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(unfold(&[1.0], &spec).is_err());
        assert!(unfold(&[2.0, 1.0], &spec).is_err());
    }

    #[test]
    fn band_boundary_is_closed() {
        let spec = BilliardSpec::golden();
        let omega = 1234.5;
        let star = band_center(&spec, 1.0, omega);
        let set = ScattererSet::new(
            vec![crate::basis::Point::new(0.3, 0.4); 3],
            vec![star + PI / 4.0, star - PI / 4.0, star + PI / 4.0 + 1e-6],
            1.0,
        );
        let p = predict_strong_coupling(&set, &spec, omega).unwrap();
        assert_eq!(p.in_strong_band, vec![true, true, false]);
        assert!(predict_strong_coupling(&set, &spec, 0.0).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }

    #[test]
    fn two_sample_ks_is_a_metric() {
        let a = [0.1, 0.5, 0.9, 1.3];
        let b = [0.2, 0.4, 1.0, 2.0, 2.5];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
    }
}
