use std::sync::{Arc, OnceLock};

use point_billiard::basis::{BilliardSpec, ModeTable, Point};
use point_billiard::greens::{Greens, GreensAccuracy, ScattererSet, TailMode};
use point_billiard::solver::{
    build_eigenfunction, solve, solve_multi, solve_single, EnergyWindow, LevelKind, SolverOptions,
};
use proptest::prelude::*;

const N: usize = 20_000;

fn table() -> Arc<ModeTable> {
    static T: OnceLock<Arc<ModeTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(ModeTable::lowest(BilliardSpec::golden(), N).unwrap()))
        .clone()
}

fn acc() -> GreensAccuracy {
    GreensAccuracy::new(N, TailMode::Integral)
}

fn greens(points: &[(f64, f64)], vbar_inv: &[f64]) -> Greens {
    let set = ScattererSet::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect(), vbar_inv.to_vec(), 1.0);
    Greens::new(table(), set).unwrap()
}

#[test]
fn residuals_respect_tolerance() {
    let g = greens(&[(0.3137, 0.5279)], &[0.7]);
    let w = EnergyWindow::from_levels(&table(), 100, 400).unwrap();
    for tol in [1e-6, 1e-9, 1e-11] {
        let r = solve_single(&g, &w, &acc(), &SolverOptions::with_tol(tol)).unwrap();
        assert!(r.diagnostics.max_residual <= tol, "tol {tol:e}: {:e}", r.diagnostics.max_residual);
        assert!(r.diagnostics.pole_conflicts.is_empty());
    }
}

#[test]
fn multi_path_agrees_with_single_path() {
    let g = greens(&[(0.4412, 0.3093)], &[-0.6]);
    let w = EnergyWindow::from_levels(&table(), 300, 420).unwrap();
    let opts = SolverOptions::default();
    let a = solve_single(&g, &w, &acc(), &opts).unwrap().eigenvalues();
    let b = solve_multi(&g, &w, &acc(), &opts).unwrap().eigenvalues();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn two_scatterers_keep_the_level_count() {
    let g = greens(&[(0.3137, 0.5279), (0.7412, 1.1093)], &[0.5, -0.8]);
    let t = table();
    let w = EnergyWindow::from_levels(&t, 500, 600).unwrap();
    let r = solve_multi(&g, &w, &acc(), &SolverOptions::default()).unwrap();
    let n = r.eigenvalues().len() as i64;
    // one level per gap, give or take the ends of the window
    assert!((n - 100).abs() <= 2, "{n} levels");
    let levels = r.eigenvalues();
    assert!(levels.windows(2).all(|p| p[0] <= p[1]));
    assert!(levels.iter().all(|x| w.contains(*x)));
}

#[test]
fn empty_set_echoes_the_unperturbed_levels() {
    let g = greens(&[], &[]);
    let t = table();
    let w = EnergyWindow::from_levels(&t, 10, 60).unwrap();
    let r = solve(&g, &w, &acc(), &SolverOptions::default()).unwrap();
    let expect: Vec<f64> = t.energies().iter().copied().filter(|e| w.contains(*e)).collect();
    assert_eq!(r.eigenvalues(), expect);
    assert!(r.levels.iter().all(|l| l.kind == LevelKind::Unshifted));
}

#[test]
fn runs_are_deterministic() {
    let g = greens(&[(0.3137, 0.5279), (0.7412, 1.1093)], &[0.5, -0.8]);
    let w = EnergyWindow::from_levels(&table(), 200, 260).unwrap();
    let opts = SolverOptions::default();
    let a = solve(&g, &w, &acc(), &opts).unwrap().eigenvalues();
    let b = solve(&g, &w, &acc(), &opts).unwrap().eigenvalues();
    assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
}

#[test]
fn eigenfunction_is_normalized() {
    let big = Arc::new(ModeTable::lowest(BilliardSpec::golden(), 100_000).unwrap());
    let g = Greens::new(big.clone(), ScattererSet::single(Point::new(0.3137, 0.5279), 0.7, 1.0)).unwrap();
    let w = EnergyWindow::from_levels(&big, 20, 80).unwrap();
    let coarse = GreensAccuracy::new(N, TailMode::Integral);
    let fine = GreensAccuracy::new(100_000, TailMode::Integral);
    let r = solve_single(&g, &w, &fine, &SolverOptions::default()).unwrap();
    for level in &r.levels {
        let a = build_eigenfunction(level, &g, &coarse).unwrap();
        let b = build_eigenfunction(level, &g, &fine).unwrap();
        for psi in [&a, &b] {
            assert!((psi.norm_squared() + psi.truncation_remainder - 1.0).abs() <= 1e-12);
        }
        assert!(b.truncation_remainder < 0.25 * a.truncation_remainder);
        assert!((b.norm_squared() - 1.0).abs() < 1e-5);
    }
}

#[test]
fn weak_coupling_eigenfunction_stays_on_its_mode() {
    let g = greens(&[(0.3137, 0.5279)], &[1e3]);
    let t = table();
    let e = t.energies();
    let w = EnergyWindow::from_levels(&t, 30, 60).unwrap();
    let r = solve_single(&g, &w, &acc(), &SolverOptions::default()).unwrap();
    for level in &r.levels {
        let k = e.partition_point(|x| *x < level.omega);
        let near = if level.omega - e[k - 1] < e[k] - level.omega { k - 1 } else { k };
        let psi = build_eigenfunction(level, &g, &acc()).unwrap();
        assert!(psi.overlap(near).abs() >= 0.99, "level {} overlap {}", level.omega, psi.overlap(near));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_scatterer_levels_interlace(
        x in 0.05f64..0.95, y in 0.05f64..1.55, v in -5.0f64..5.0, first in 10usize..500,
    ) {
        let g = greens(&[(x, y)], &[v]);
        let t = table();
        let e = t.energies();
        let w = EnergyWindow::from_levels(&t, first, first + 40).unwrap();
        let r = solve_single(&g, &w, &acc(), &SolverOptions::default()).unwrap();
        for level in r.levels.iter().filter(|l| l.kind == LevelKind::BetweenPoles) {
            let (a, b) = level.bracket;
            prop_assert!(a < level.omega && level.omega < b);
            // no unperturbed level strictly inside the bracket
            let inside = e.iter().filter(|&&x| a < x && x < b).count();
            prop_assert_eq!(inside, 0);
        }
        let between: Vec<f64> = r.levels.iter().filter(|l| l.kind == LevelKind::BetweenPoles).map(|l| l.omega).collect();
        prop_assert!(between.windows(2).all(|p| p[0] < p[1]));
    }
}
