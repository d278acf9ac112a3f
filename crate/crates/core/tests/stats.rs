use std::f64::consts::PI;
use std::sync::Arc;

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::EnergyWindow;
use point_billiard::stats::{
    band_energy_range, compare_references, exclude_lowest, gbar_inflection_survey, ks_distance, ks_two_sample,
    reference_pdf, spacing_distribution, unfold, ReferenceKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 100_000;

fn exponential(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..SAMPLES).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()
}

fn wigner(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..SAMPLES)
        .map(|_| (-4.0 * (1.0 - rng.random::<f64>()).ln() / PI).sqrt())
        .collect()
}

#[test]
fn sampled_references_are_recognized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let exp = exponential(&mut rng);
    let goe = wigner(&mut rng);
    assert!(ks_distance(&exp, ReferenceKind::Poisson).unwrap() <= 0.01);
    assert!(ks_distance(&goe, ReferenceKind::Goe).unwrap() <= 0.01);
    assert!(ks_distance(&exp, ReferenceKind::Goe).unwrap() > 0.1);
    assert!(ks_two_sample(&exp, &exponential(&mut rng)).unwrap() <= 0.01);
    assert!(ks_two_sample(&exp, &goe).unwrap() > 0.1);
}

#[test]
fn unperturbed_rectangle_looks_poissonian() {
    let table = ModeTable::lowest(BilliardSpec::golden(), 6000).unwrap();
    let levels = exclude_lowest(&table.energies()[..5200], &table, 200);
    assert_eq!(levels.len(), 5000);
    let u = unfold(&levels, table.spec()).unwrap();
    assert!((u.mean_spacing() - 1.0).abs() < 1e-3);
    let c = compare_references(&u).unwrap();
    assert_eq!(c.closer_to, ReferenceKind::Poisson);
    assert!(c.ks_poisson < c.ks_goe);
}

#[test]
fn histogram_integrates_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut levels: Vec<f64> = (0..2000).map(|_| rng.random_range(0.0..500.0)).collect();
    levels.sort_by(f64::total_cmp);
    let u = unfold(&levels, &BilliardSpec::golden()).unwrap();
    for bins in [1, 7, 40] {
        let h = spacing_distribution(&u, bins).unwrap();
        let area: f64 = h.densities.iter().zip(h.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(h.counts.iter().sum::<usize>(), h.sample_size);
        assert!(h.warning.is_none());
    }
    let small = unfold(&levels[..50], &BilliardSpec::golden()).unwrap();
    assert!(spacing_distribution(&small, 10).unwrap().warning.is_some());
}

#[test]
fn reference_densities_integrate_to_one() {
    for kind in [ReferenceKind::Poisson, ReferenceKind::Goe] {
        let h = 1e-3;
        let area: f64 = (0..20_000).map(|k| reference_pdf(kind, (k as f64 + 0.5) * h).unwrap() * h).sum();
        assert!((area - 1.0).abs() < 1e-6, "{kind:?}: {area}");
    }
}

#[test]
fn band_traversal_spans_e_pi_squared() {
    let spec = BilliardSpec::golden();
    for (lambda, v) in [(1.0, 0.0), (2.5, 1.3), (0.1, -0.7)] {
        let (lo, hi) = band_energy_range(&spec, lambda, v);
        assert!((hi / lo / (PI * PI).exp() - 1.0).abs() < 1e-12);
        assert!(((lo * hi).sqrt() / (lambda * (2.0 * PI * v).exp()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn survey_rows_sit_inside_their_gaps() {
    let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), 20_000).unwrap());
    let g = Greens::new(table.clone(), ScattererSet::single(Point::new(0.3137, 0.5279), 0.0, 1.0)).unwrap();
    let acc = GreensAccuracy::new(20_000, TailMode::Integral);
    let w = EnergyWindow::from_levels(&table, 500, 560).unwrap();
    let s = gbar_inflection_survey(&g, &w, &acc).unwrap();
    assert!(s.rows.len() >= 50);
    for r in &s.rows {
        assert!(r.gap_lo < r.omega_tilde && r.omega_tilde < r.gap_hi);
        assert!(r.abs_derivative > 0.0);
        assert!(r.midpoint_offset() < 0.5);
    }
    let e = table.energies();
    let empty = EnergyWindow::new(e[500] + 1e-9, e[501] - 1e-9).unwrap();
    let none = gbar_inflection_survey(&g, &empty, &acc).unwrap();
    assert!(none.rows.is_empty() && !none.notes.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spacings_ignore_affine_shift(shift in -1e3f64..1e3, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut levels: Vec<f64> = (0..300).map(|_| rng.random_range(1e3..2e3)).collect();
        levels.sort_by(f64::total_cmp);
        let shifted: Vec<f64> = levels.iter().map(|l| l + shift).collect();
        let spec = BilliardSpec::golden();
        let a = unfold(&levels, &spec).unwrap().spacings();
        let b = unfold(&shifted, &spec).unwrap().spacings();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
