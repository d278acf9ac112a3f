use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::linalg::jacobi_eigen;
use point_billiard::rankone::{
    approximate_from, rank_one_update, reduce_full, reduce_full_checked, reduce_step, ReductionState,
    SigmaDecomposition,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table() -> Arc<ModeTable> {
    static T: OnceLock<Arc<ModeTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(ModeTable::lowest(BilliardSpec::golden(), 100_000).unwrap()))
        .clone()
}

fn random_config(rng: &mut ChaCha8Rng, n: usize) -> Greens {
    let points = (0..n)
        .map(|_| Point::new(rng.random_range(0.05..0.95), rng.random_range(0.05..1.55)))
        .collect();
    let vbar = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Greens::new(table(), ScattererSet::new(points, vbar, 1.0)).unwrap()
}

fn gap_point(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> f64 {
    let e = table().energies().to_vec();
    let k = rng.random_range(lo..hi);
    e[k] + rng.random_range(0.2..0.8) * (e[k + 1] - e[k])
}

fn dense(m: &DMatrix<f64>) -> Vec<f64> {
    jacobi_eigen(m).values.iter().cloned().collect()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn three_scatterers_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let acc = GreensAccuracy::new(2000, TailMode::Integral);
    for _ in 0..10 {
        let g = random_config(&mut rng, 3);
        let omega = gap_point(&mut rng, 20, 1500);
        let exact = dense(&g.lambda_inverse(omega, &acc).unwrap());
        let summary = reduce_full_checked(&g, omega, &acc).unwrap();
        assert!(max_dev(&summary.eigenvalues, &exact) <= 1e-8);
        assert_eq!(summary.steps, 2000);
        assert!(summary.max_orthogonality_defect <= 1e-12);
    }
}

#[test]
fn every_step_interlaces_and_keeps_the_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = random_config(&mut rng, 5);
    let acc = GreensAccuracy::new(3000, TailMode::Integral);
    let omega = gap_point(&mut rng, 100, 200);
    let decomp = SigmaDecomposition::new(&g, omega, &acc).unwrap();
    let mut state = ReductionState::initial(&decomp);
    for k in 0..decomp.term_count() {
        let before: f64 = state.diag.iter().sum();
        let z = state.residual_vector(&decomp, k);
        let (next, report) = reduce_step(&state, &decomp).unwrap();
        let after: f64 = next.diag.iter().sum();
        let added = decomp.weights[k] * z.iter().map(|x| x * x).sum::<f64>();
        let scale = before.abs().max(after.abs()).max(added.abs()).max(1.0);
        assert!((after - before - added).abs() <= 1e-12 * scale, "step {k}");
        assert_eq!(report.interlacing_excess, 0.0, "step {k}");
        assert!(report.orthogonality_defect <= 1e-12);
        state = next;
    }
}

#[test]
fn far_level_shifts_to_first_order() {
    let d = [-1.0, 0.5, 2.0, 3.5];
    let z = [0.3, -0.7, 0.2, 0.9];
    let rho = 1e-7;
    let up = rank_one_update(&d, &z, rho);
    for i in 0..4 {
        let first = d[i] + rho * z[i] * z[i];
        assert!((up.values[i] - first).abs() < 1e-12, "{} vs {first}", up.values[i]);
    }
}

#[test]
fn approximation_ladder_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = random_config(&mut rng, 3);
    let acc = GreensAccuracy::new(20_000, TailMode::Integral);
    let mut mean = [0.0; 3];
    for _ in 0..20 {
        let omega = gap_point(&mut rng, 200, 2000);
        let decomp = SigmaDecomposition::new(&g, omega, &acc).unwrap();
        let exact = reduce_full(&g, omega, &acc).unwrap();
        for (slot, window) in [4, 16, 64].into_iter().enumerate() {
            mean[slot] += max_dev(&approximate_from(&decomp, &g, window).eigenvalues(), &exact) / 20.0;
        }
    }
    assert!(mean[0] > mean[1] && mean[1] > mean[2], "{mean:?}");
}

#[test]
fn folded_diagonal_follows_the_log_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = random_config(&mut rng, 2);
    let acc = GreensAccuracy::new(100_000, TailMode::Integral);
    let half_width = std::f64::consts::PI * g.table().spec().mass / 4.0;
    let e = table().energies().to_vec();
    let mut within = 0;
    let total = 50;
    for k in (3000..3000 + total).map(|k| k * 2) {
        let omega = 0.5 * (e[k] + e[k + 1]);
        let approx = approximate_from(&SigmaDecomposition::new(&g, omega, &acc).unwrap(), &g, 16);
        let closed = approx.closed_form.clone().unwrap();
        within += approx
            .diag
            .iter()
            .zip(&closed)
            .filter(|(d, c)| (*d - *c).abs() <= half_width)
            .count();
    }
    // the folded sum fluctuates about the log law; most midpoints stay inside the band
    assert!(within as f64 >= 0.9 * (2 * total) as f64, "{within} of {}", 2 * total);
}

#[test]
fn keeping_every_term_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let g = random_config(&mut rng, 4);
    let acc = GreensAccuracy::new(1500, TailMode::Integral);
    let omega = gap_point(&mut rng, 50, 500);
    let decomp = SigmaDecomposition::new(&g, omega, &acc).unwrap();
    let approx = approximate_from(&decomp, &g, 1500);
    assert_eq!(approx.eigenvalues(), dense(&decomp.reconstruct()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_update_matches_dense(
        d in prop::collection::vec(-10.0f64..10.0, 4),
        z in prop::collection::vec(-2.0f64..2.0, 4),
        rho in -5.0f64..5.0,
    ) {
        let mut d = d;
        d.sort_by(f64::total_cmp);
        let m = DMatrix::from_fn(4, 4, |r, c| rho * z[r] * z[c] + if r == c { d[r] } else { 0.0 });
        let up = rank_one_update(&d, &z, rho);
        let exact = dense(&m);
        let scale = m.amax().max(1.0);
        prop_assert!(max_dev(&up.values, &exact) <= 1e-10 * scale);
        let recon = &up.omega * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(up.values.clone())) * up.omega.transpose();
        prop_assert!((recon - m).amax() <= 1e-10 * scale);
    }
}
