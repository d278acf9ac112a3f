use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::error::Error;
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use proptest::prelude::*;

fn table() -> Arc<ModeTable> {
    static T: OnceLock<Arc<ModeTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(ModeTable::lowest(BilliardSpec::golden(), 100_000).unwrap()))
        .clone()
}

fn pair() -> Greens {
    let set = ScattererSet::new(vec![Point::new(0.3137, 0.5279), Point::new(0.7412, 1.1093)], vec![0.3, -0.2], 1.0);
    Greens::new(table(), set).unwrap()
}

#[test]
fn integral_tail_accelerates_convergence() {
    let g = pair();
    let t = table();
    let e = t.energies();
    let omega = 0.5 * (e[499] + e[500]);
    let at = |n, tail| g.g_bar(0, omega, &GreensAccuracy::new(n, tail)).unwrap().value;
    let plain = (at(25_000, TailMode::None) - at(100_000, TailMode::None)).abs();
    let tailed = (at(25_000, TailMode::Integral) - at(100_000, TailMode::Integral)).abs();
    assert!(tailed < plain / 10.0, "tailed {tailed:e} vs plain {plain:e}");
    let est = g.g_bar(0, omega, &GreensAccuracy::new(25_000, TailMode::Integral)).unwrap().error_estimate;
    assert!(tailed <= est, "difference {tailed:e} exceeds estimate {est:e}");
}

#[test]
fn derivative_matches_finite_difference() {
    let g = pair();
    let acc = GreensAccuracy::default();
    let t = table();
    let e = t.energies();
    for k in [20, 700, 3000] {
        let x = e[k] + 0.37 * (e[k + 1] - e[k]);
        let h = 1e-5;
        let fd = (g.g_bar(1, x + h, &acc).unwrap().value - g.g_bar(1, x - h, &acc).unwrap().value) / (2.0 * h);
        let d = g.g_bar_derivative(1, x, &acc).unwrap().value;
        assert!((d - fd).abs() < 1e-6 * d.abs(), "{d} vs {fd}");
        assert!(d < 0.0);
    }
}

#[test]
fn value_at_i_lambda_is_the_spectral_weight() {
    // Ḡ(iΛ) = −iΛ·Σ φ²/(ε² + Λ²), tails included
    for lambda in [0.5, 3.0] {
        let set = ScattererSet::single(Point::new(0.41, 0.93), 0.0, lambda);
        let g = Greens::new(table(), set).unwrap();
        let acc = GreensAccuracy::default();
        let z = g.g_bar_complex(0, Complex64::new(0.0, lambda), &acc).unwrap();
        let w = g.spectral_weight(0, &acc).unwrap().value;
        assert!(z.re.abs() < 1e-12, "{z}");
        assert!((z.im + lambda * w).abs() < 1e-12 * lambda * w);
    }
}

#[test]
fn naive_series_diverges_and_regularized_converges() {
    let g = pair();
    let omega = table().energies()[0] - 5.0;
    let schedule = [1_000, 10_000, 100_000];
    let naive = g.naive_series_divergence_witness(0, omega, &schedule).unwrap();
    assert!(naive[0] > naive[1] && naive[1] > naive[2]);
    let reg = g.regularized_partial_sums(0, omega, &schedule).unwrap();
    assert!((reg[2] - reg[1]).abs() < (reg[1] - reg[0]).abs());
    assert!(g.naive_series_divergence_witness(0, omega, &[10, 5]).is_err());
}

#[test]
fn pole_proximity_names_the_level() {
    let g = pair();
    let t = table();
    let e = t.energies();
    let acc = GreensAccuracy::default();
    match g.g_bar(0, e[41], &acc) {
        Err(Error::PoleProximity { index, .. }) => assert_eq!(index, 42),
        other => panic!("expected a pole error, got {other:?}"),
    }
}

#[test]
fn tapered_offdiagonal_settles() {
    let g = pair();
    let t = table();
    let e = t.energies();
    let omega = 0.5 * (e[299] + e[300]);
    let a = g.g0_offdiag(0, 1, omega, &GreensAccuracy::new(50_000, TailMode::Integral)).unwrap();
    let b = g.g0_offdiag(0, 1, omega, &GreensAccuracy::new(100_000, TailMode::Integral)).unwrap();
    assert!((a.value - b.value).abs() < 0.05, "{} vs {}", a.value, b.value);
}

#[test]
fn accuracy_and_index_checks() {
    let g = pair();
    assert!(matches!(
        g.g_bar(0, 10.0, &GreensAccuracy::new(200_000, TailMode::Integral)),
        Err(Error::InvalidAccuracy(_))
    ));
    assert!(g.g_bar(5, 10.0, &GreensAccuracy::default()).is_err());
    assert!(g.g0_offdiag(1, 1, 10.0, &GreensAccuracy::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lambda_inverse_is_exactly_symmetric(
        x1 in 0.05f64..0.95, y1 in 0.05f64..1.55,
        x2 in 0.05f64..0.95, y2 in 0.05f64..1.55,
        k in 5usize..2000, frac in 0.01f64..0.99,
    ) {
        prop_assume!((x1 - x2).abs() + (y1 - y2).abs() > 1e-3);
        let set = ScattererSet::new(vec![Point::new(x1, y1), Point::new(x2, y2), Point::new(0.5, 0.7)], vec![0.1, 0.2, 0.3], 1.0);
        let g = Greens::new(table(), set).unwrap();
        let t = table();
    let e = t.energies();
        let omega = e[k] + frac * (e[k + 1] - e[k]);
        let acc = GreensAccuracy::new(5_000, TailMode::Integral);
        prop_assume!(g.check_pole_distance(omega, &acc).is_ok());
        let m = g.lambda_inverse(omega, &acc).unwrap();
        prop_assert_eq!(m.clone(), m.transpose());
        for i in 0..3 {
            let diag = g.g_bar(i, omega, &acc).unwrap().value - g.scatterers().inverse_couplings[i];
            prop_assert!((m[(i, i)] - diag).abs() <= 1e-12 * diag.abs().max(1.0));
        }
    }

    #[test]
    fn conjugation_is_exact_off_axis(re in -50.0f64..5000.0, im in 0.01f64..100.0) {
        let g = pair();
        let acc = GreensAccuracy::new(3_000, TailMode::Integral);
        let d = point_billiard::extension::hermitian_conjugation_check(&g, Complex64::new(re, im), &acc).unwrap();
        prop_assert!(d <= 1e-12);
    }
}
