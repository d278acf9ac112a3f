//! Eigenvalues of `λ⁻¹(ω)` by successive rank-one updates.
//!
//! At fixed ω the matrix splits as
//!
//! ```text
//! Σ(ω) = T + Σ_n ρ_n·v_n·v_nᵀ,    v_n = (φ_n(x_1), …, φ_n(x_N)),  ρ_n = 1/(ω − ε_n)
//! ```
//!
//! with `T` diagonal. Starting from `T`, each term is absorbed in turn by
//! solving the secular equation of a diagonal-plus-rank-one matrix; the
//! accumulated orthogonal basis rotates the remaining vectors. After all
//! `n_max` steps the diagonal holds the eigenvalues of `Σ(ω)`.
//!
//! With the integral tail the off-diagonal series is tapered near the
//! cutoff. The taper is kept exact by absorbing `w_n·ρ_n·v_n v_nᵀ` as the
//! rank-one part and folding `(1 − w_n)·ρ_n·v_n²` into `T`.
//!
//! Every step checks interlacing, trace invariance and orthogonality of the
//! step rotation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{Greens, GreensAccuracy, TailMode};
use crate::linalg::jacobi_eigen;

const BISECTION_LIMIT: usize = 256;

/// Per-step orthogonality tolerance on `ΩᵀΩ − 1`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// `Σ(ω)` split into its diagonal part and rank-one terms.
#[derive(Debug, Clone)]
pub struct SigmaDecomposition {
    pub omega: f64,
    /// Diagonal of `T`, one entry per scatterer (unsorted).
    pub unperturbed_diag: Vec<f64>,
    /// Row `n` is `v_n`.
    pub vectors: DMatrix<f64>,
    /// `ρ_n`, including the taper weight.
    pub weights: Vec<f64>,
}

impl SigmaDecomposition {
    pub fn new(greens: &Greens, omega: f64, acc: &GreensAccuracy) -> Result<Self> {
        if greens.is_empty() {
            return Err(Error::Contract("rank-one reduction needs at least one scatterer".into()));
        }
        greens.check_accuracy(acc)?;
        greens.check_pole_distance(omega, acc)?;
        let n_sc = greens.len();
        let n_max = acc.n_max;
        let lambda_sq = greens.lambda() * greens.lambda();
        let energies = &greens.table().energies()[..n_max];
        let start = greens.taper_start(acc);

        let vectors = DMatrix::from_fn(n_max, n_sc, |n, i| greens.source().values(i)[n]);
        let tail = greens.diagonal_tail(omega, acc);
        let mut diag = vec![0.0; n_sc];
        let mut weights = Vec::with_capacity(n_max);
        for (n, &e) in energies.iter().enumerate() {
            let r = 1.0 / (omega - e);
            let w = match acc.tail {
                TailMode::None => 1.0,
                TailMode::Integral => Greens::taper_weight(n, start, n_max),
            };
            let fold = e / (e * e + lambda_sq) + (1.0 - w) * r;
            for (i, d) in diag.iter_mut().enumerate() {
                let v = vectors[(n, i)];
                *d += v * v * fold;
            }
            weights.push(w * r);
        }
        for (i, d) in diag.iter_mut().enumerate() {
            *d += tail - greens.scatterers().inverse_couplings[i];
        }
        Ok(SigmaDecomposition {
            omega,
            unperturbed_diag: diag,
            vectors,
            weights,
        })
    }

    pub fn scatterer_count(&self) -> usize {
        self.unperturbed_diag.len()
    }

    pub fn term_count(&self) -> usize {
        self.weights.len()
    }

    /// `T + Σ_n ρ_n v_n v_nᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        assemble(self, &vec![true; self.term_count()]).1
    }
}

// Terms with `keep[n]` stay rank-one; the rest fold into the diagonal.
fn assemble(decomp: &SigmaDecomposition, keep: &[bool]) -> (Vec<f64>, DMatrix<f64>) {
    let n_sc = decomp.scatterer_count();
    let mut folded = vec![0.0; n_sc];
    let mut m = DMatrix::<f64>::zeros(n_sc, n_sc);
    for (n, &rho) in decomp.weights.iter().enumerate() {
        let v = decomp.vectors.row(n);
        if keep[n] {
            for i in 0..n_sc {
                for j in 0..n_sc {
                    m[(i, j)] += rho * v[i] * v[j];
                }
            }
        } else {
            for i in 0..n_sc {
                folded[i] += rho * v[i] * v[i];
            }
        }
    }
    let diag: Vec<f64> = decomp
        .unperturbed_diag
        .iter()
        .zip(&folded)
        .map(|(d, f)| d + f)
        .collect();
    for i in 0..n_sc {
        m[(i, i)] += diag[i];
    }
    (diag, m)
}

/// Eigen-decomposition of `diag(d) + ρ·z·zᵀ`: ascending eigenvalues and the
/// orthogonal `Ω` whose columns are the eigenvectors.
#[derive(Debug, Clone)]
pub struct RankOneUpdate {
    pub values: Vec<f64>,
    pub omega: DMatrix<f64>,
}

/// Solves `diag(d) + ρ·z·zᵀ` for ascending `d`.
///
/// Entries with negligible `z_j` and clusters of nearly equal `d_j` are
/// deflated first; the remaining secular roots are bisected with offsets
/// measured from the nearer pole, and eigenvectors use the Gu–Eisenstat
/// corrected `ẑ` so they stay orthogonal.
pub fn rank_one_update(d: &[f64], z: &[f64], rho: f64) -> RankOneUpdate {
    let n = d.len();
    assert_eq!(n, z.len());
    if rho == 0.0 || z.iter().all(|&x| x == 0.0) {
        return RankOneUpdate {
            values: d.to_vec(),
            omega: DMatrix::identity(n, n),
        };
    }
    if rho < 0.0 {
        // −A = diag(−d) − ρ·zzᵀ; reverse to keep the diagonal ascending.
        let nd: Vec<f64> = d.iter().rev().map(|x| -x).collect();
        let nz: Vec<f64> = z.iter().rev().cloned().collect();
        let up = rank_one_update(&nd, &nz, -rho);
        let values = up.values.iter().rev().map(|x| -x).collect();
        let omega = DMatrix::from_fn(n, n, |r, c| up.omega[(n - 1 - r, n - 1 - c)]);
        return RankOneUpdate { values, omega };
    }

    let mut d = d.to_vec();
    let mut z = z.to_vec();
    let znorm2: f64 = z.iter().map(|x| x * x).sum();
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 8.0 * f64::EPSILON * dmax.max(rho * znorm2);

    // Deflation rotations, accumulated in g.
    let mut g = DMatrix::<f64>::identity(n, n);
    for j in 0..n.saturating_sub(1) {
        if z[j] == 0.0 || z[j + 1] == 0.0 {
            continue;
        }
        if d[j + 1] - d[j] <= tol {
            let r = z[j].hypot(z[j + 1]);
            let (c, s) = (z[j + 1] / r, z[j] / r);
            // new basis: e_j' = c·e_j − s·e_{j+1}, e_{j+1}' = s·e_j + c·e_{j+1}
            for row in 0..n {
                let gj = g[(row, j)];
                let gk = g[(row, j + 1)];
                g[(row, j)] = c * gj - s * gk;
                g[(row, j + 1)] = s * gj + c * gk;
            }
            let (dj, dk) = (d[j], d[j + 1]);
            d[j] = c * c * dj + s * s * dk;
            d[j + 1] = s * s * dj + c * c * dk;
            z[j] = 0.0;
            z[j + 1] = r;
        }
    }
    let active: Vec<usize> = (0..n)
        .filter(|&j| (rho.sqrt() * z[j]).abs() > tol.sqrt() * f64::EPSILON.sqrt())
        .collect();

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for j in 0..n {
        if !active.contains(&j) {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            pairs.push((d[j], e));
        }
    }
    if !active.is_empty() {
        let da: Vec<f64> = active.iter().map(|&j| d[j]).collect();
        let za: Vec<f64> = active.iter().map(|&j| z[j]).collect();
        for (value, vec_active) in secular_solve(&da, &za, rho) {
            let mut v = vec![0.0; n];
            for (k, &j) in active.iter().enumerate() {
                v[j] = vec_active[k];
            }
            pairs.push((value, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let local = DMatrix::from_fn(n, n, |r, c| pairs[c].1[r]);
    RankOneUpdate {
        values,
        omega: g * local,
    }
}

// Roots and eigenvectors of diag(d) + ρzzᵀ with ρ > 0, d strictly
// ascending and every z_j nonzero.
fn secular_solve(d: &[f64], z: &[f64], rho: f64) -> Vec<(f64, Vec<f64>)> {
    let n = d.len();
    let znorm2: f64 = z.iter().map(|x| x * x).sum();
    // f(τ) = 1/ρ + Σ z_j² / (δ_j − τ), δ_j = d_j − d_origin
    let secular = |origin: usize, tau: f64| -> f64 {
        let mut s = 1.0 / rho;
        for j in 0..n {
            s += z[j] * z[j] / ((d[j] - d[origin]) - tau);
        }
        s
    };
    let mut roots: Vec<(usize, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        let (origin, mut lo, mut hi) = if i + 1 < n {
            let half = 0.5 * (d[i + 1] - d[i]);
            if secular(i, half) >= 0.0 {
                (i, 0.0, half)
            } else {
                (i + 1, -half, 0.0)
            }
        } else {
            (i, 0.0, rho * znorm2 * (1.0 + 4.0 * f64::EPSILON))
        };
        for _ in 0..BISECTION_LIMIT {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if secular(origin, mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        roots.push((origin, lo + 0.5 * (hi - lo)));
    }
    // λ_i − d_j evaluated from the stored offsets
    let gap = |i: usize, j: usize| (d[roots[i].0] - d[j]) + roots[i].1;

    let zhat: Vec<f64> = (0..n)
        .map(|j| {
            let mut p = gap(n - 1, j) / rho;
            for i in 0..j {
                p *= gap(i, j) / (d[i] - d[j]);
            }
            for i in j..n - 1 {
                p *= gap(i, j) / (d[i + 1] - d[j]);
            }
            p.abs().sqrt().copysign(z[j])
        })
        .collect();

    (0..n)
        .map(|i| {
            let mut v: Vec<f64> = (0..n).map(|j| zhat[j] / -gap(i, j)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            (d[roots[i].0] + roots[i].1, v)
        })
        .collect()
}

/// What one reduction step verified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: usize,
    pub trace_defect: f64,
    pub orthogonality_defect: f64,
    /// Worst amount by which a new eigenvalue left its interlacing bracket
    /// (zero when interlacing holds).
    pub interlacing_excess: f64,
    /// Whether the dense fallback replaced the secular solution.
    pub fallback: bool,
}

/// Reduction after `k` absorbed terms.
#[derive(Debug, Clone)]
pub struct ReductionState {
    pub k: usize,
    /// Current eigenvalues, ascending.
    pub diag: Vec<f64>,
    /// Accumulated orthogonal basis; column `i` belongs to `diag[i]`.
    pub basis: DMatrix<f64>,
}

impl ReductionState {
    /// The diagonal of `T`, sorted, with the sorting permutation as basis.
    pub fn initial(decomp: &SigmaDecomposition) -> Self {
        let n = decomp.scatterer_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| decomp.unperturbed_diag[a].total_cmp(&decomp.unperturbed_diag[b]));
        ReductionState {
            k: 0,
            diag: order.iter().map(|&i| decomp.unperturbed_diag[i]).collect(),
            basis: DMatrix::from_fn(n, n, |r, c| if order[c] == r { 1.0 } else { 0.0 }),
        }
    }

    /// `v_n` expressed in the current basis.
    pub fn residual_vector(&self, decomp: &SigmaDecomposition, n: usize) -> Vec<f64> {
        let v = decomp.vectors.row(n).transpose();
        (self.basis.transpose() * v).iter().cloned().collect()
    }
}

fn interlacing_excess(old: &[f64], new: &[f64], rho: f64, znorm2: f64) -> f64 {
    let n = old.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let (lo, hi) = if rho < 0.0 {
            (if i == 0 { old[0] + rho * znorm2 } else { old[i - 1] }, old[i])
        } else {
            (old[i], if i + 1 == n { old[i] + rho * znorm2 } else { old[i + 1] })
        };
        worst = worst.max(lo - new[i]).max(new[i] - hi);
    }
    worst
}

fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - DMatrix::<f64>::identity(n, n)).amax()
}

/// Absorbs term `state.k` (0-based) into the reduction.
pub fn reduce_step(state: &ReductionState, decomp: &SigmaDecomposition) -> Result<(ReductionState, StepReport)> {
    let k = state.k;
    if k >= decomp.term_count() {
        return Err(Error::Contract(format!("step {k} beyond {} terms", decomp.term_count())));
    }
    let rho = decomp.weights[k];
    let z = state.residual_vector(decomp, k);
    let znorm2: f64 = z.iter().map(|x| x * x).sum();
    let scale = state
        .diag
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(rho.abs() * znorm2);
    let slack = 64.0 * f64::EPSILON * scale * state.diag.len() as f64;

    let check = |up: &RankOneUpdate| {
        let trace_defect = (up.values.iter().sum::<f64>() - state.diag.iter().sum::<f64>() - rho * znorm2).abs();
        let excess = interlacing_excess(&state.diag, &up.values, rho, znorm2);
        let ortho = orthogonality_defect(&up.omega);
        (trace_defect, excess, ortho)
    };
    let mut up = rank_one_update(&state.diag, &z, rho);
    let (mut trace_defect, mut excess, mut ortho) = check(&up);
    let mut fallback = false;
    if excess > slack || ortho > ORTHOGONALITY_TOL || trace_defect > slack {
        // Retry with a dense solve of the same small matrix.
        let n = z.len();
        let m = DMatrix::from_fn(n, n, |r, c| {
            rho * z[r] * z[c] + if r == c { state.diag[r] } else { 0.0 }
        });
        let e = jacobi_eigen(&m);
        up = RankOneUpdate {
            values: e.values.iter().cloned().collect(),
            omega: e.vectors,
        };
        (trace_defect, excess, ortho) = check(&up);
        fallback = true;
        if excess > slack || ortho > ORTHOGONALITY_TOL {
            return Err(Error::BracketViolation {
                step: k,
                reason: format!("interlacing excess {excess:e}, orthogonality defect {ortho:e}"),
            });
        }
    }
    let next = ReductionState {
        k: k + 1,
        diag: up.values,
        basis: &state.basis * &up.omega,
    };
    let report = StepReport {
        k,
        trace_defect,
        orthogonality_defect: ortho,
        interlacing_excess: excess.max(0.0),
        fallback,
    };
    Ok((next, report))
}

/// Summary of a complete reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub eigenvalues: Vec<f64>,
    pub steps: usize,
    pub max_trace_defect: f64,
    pub max_orthogonality_defect: f64,
    pub max_interlacing_excess: f64,
    pub fallbacks: usize,
}

/// Runs every step and returns the sorted eigenvalues of `λ⁻¹(ω)`.
pub fn reduce_full(greens: &Greens, omega: f64, acc: &GreensAccuracy) -> Result<Vec<f64>> {
    Ok(reduce_full_checked(greens, omega, acc)?.eigenvalues)
}

/// [`reduce_full`] with the per-step invariants collected.
pub fn reduce_full_checked(greens: &Greens, omega: f64, acc: &GreensAccuracy) -> Result<ReductionSummary> {
    let decomp = SigmaDecomposition::new(greens, omega, acc)?;
    reduce_decomposition(&decomp)
}

pub fn reduce_decomposition(decomp: &SigmaDecomposition) -> Result<ReductionSummary> {
    let mut state = ReductionState::initial(decomp);
    let mut summary = ReductionSummary {
        eigenvalues: Vec::new(),
        steps: 0,
        max_trace_defect: 0.0,
        max_orthogonality_defect: 0.0,
        max_interlacing_excess: 0.0,
        fallbacks: 0,
    };
    for _ in 0..decomp.term_count() {
        let (next, report) = reduce_step(&state, decomp)?;
        state = next;
        summary.steps += 1;
        summary.max_trace_defect = summary.max_trace_defect.max(report.trace_defect);
        summary.max_orthogonality_defect = summary.max_orthogonality_defect.max(report.orthogonality_defect);
        summary.max_interlacing_excess = summary.max_interlacing_excess.max(report.interlacing_excess);
        summary.fallbacks += usize::from(report.fallback);
    }
    summary.eigenvalues = state.diag;
    Ok(summary)
}

/// `Σ(ω)` with only the terms nearest ω kept as rank-one updates.
#[derive(Debug, Clone)]
pub struct ApproximateSigma {
    pub omega: f64,
    /// `d̄_i`: the diagonal with every discarded term folded in.
    pub diag: Vec<f64>,
    /// 0-based mode indices kept, ascending.
    pub retained: Vec<usize>,
    pub matrix: DMatrix<f64>,
    /// `(M/2π)·ln(ω/Λ) − v̄_i⁻¹`, the large-ω estimate of `d̄_i`; `None`
    /// for `ω <= 0`.
    pub closed_form: Option<Vec<f64>>,
}

impl ApproximateSigma {
    /// Ascending eigenvalues of the approximate matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        jacobi_eigen(&self.matrix).values.iter().cloned().collect()
    }
}

/// Keeps the `near_window` levels closest to ω and folds the rest into the
/// diagonal.
pub fn approximate_sigma(greens: &Greens, omega: f64, acc: &GreensAccuracy, near_window: usize) -> Result<ApproximateSigma> {
    if near_window == 0 {
        return Err(Error::Contract("near_window must be at least 1".into()));
    }
    let decomp = SigmaDecomposition::new(greens, omega, acc)?;
    Ok(approximate_from(&decomp, greens, near_window))
}

pub fn approximate_from(decomp: &SigmaDecomposition, greens: &Greens, near_window: usize) -> ApproximateSigma {
    let energies = &greens.table().energies()[..decomp.term_count()];
    let omega = decomp.omega;
    let mut by_distance: Vec<usize> = (0..energies.len()).collect();
    by_distance.sort_by(|&a, &b| {
        (energies[a] - omega)
            .abs()
            .total_cmp(&(energies[b] - omega).abs())
            .then(a.cmp(&b))
    });
    let mut retained: Vec<usize> = by_distance.into_iter().take(near_window).collect();
    retained.sort_unstable();
    let mut keep = vec![false; energies.len()];
    for &n in &retained {
        keep[n] = true;
    }
    let (diag, matrix) = assemble(decomp, &keep);
    let closed_form = (omega > 0.0).then(|| {
        let star = greens.local_density() * (omega / greens.lambda()).ln();
        greens
            .scatterers()
            .inverse_couplings
            .iter()
            .map(|v| star - v)
            .collect()
    });
    ApproximateSigma {
        omega,
        diag,
        retained,
        matrix,
        closed_form,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BilliardSpec, ModeTable, Point};
    use crate::greens::ScattererSet;
    use std::sync::Arc;

    fn dense(d: &[f64], z: &[f64], rho: f64) -> Vec<f64> {
        let n = d.len();
        let m = DMatrix::from_fn(n, n, |r, c| rho * z[r] * z[c] + if r == c { d[r] } else { 0.0 });
        let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn zero_vector_is_identity() {
        let up = rank_one_update(&[1.0, 2.0, 3.0], &[0.0; 3], 5.0);
        assert_eq!(up.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(up.omega, DMatrix::identity(3, 3));
    }

    #[test]
    fn matches_dense_both_signs() {
        let d = [-1.3, 0.2, 0.9, 4.0];
        let z = [0.5, -0.7, 0.1, 1.1];
        for rho in [2.5, -0.8, 1e4, -1e-6] {
            let up = rank_one_update(&d, &z, rho);
            let reference = dense(&d, &z, rho);
            for (a, b) in up.values.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "rho={rho}: {a} vs {b}");
            }
            assert!(orthogonality_defect(&up.omega) < 1e-13);
        }
    }

    #[test]
    fn deflates_ties_and_zero_components() {
        let d = [1.0, 1.0, 2.0, 3.0];
        let z = [0.3, 0.4, 0.0, 0.6];
        let up = rank_one_update(&d, &z, 1.5);
        let reference = dense(&d, &z, 1.5);
        for (a, b) in up.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(orthogonality_defect(&up.omega) < 1e-13);
        let m = DMatrix::from_fn(4, 4, |r, c| 1.5 * z[r] * z[c] + if r == c { d[r] } else { 0.0 });
        let diag = up.omega.transpose() * m * &up.omega;
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(diag[(r, c)].abs() < 1e-12);
                }
            }
        }
    }

    fn config(n_sc: usize, n_max: usize) -> Greens {
        let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n_max).unwrap());
        let pts: Vec<Point> = (0..n_sc)
            .map(|i| Point::new(0.137 + 0.19 * i as f64, 0.311 + 0.23 * i as f64))
            .collect();
        let inv: Vec<f64> = (0..n_sc).map(|i| 0.3 * i as f64 - 0.4).collect();
        Greens::new(table, ScattererSet::new(pts, inv, 1.0)).unwrap()
    }

    #[test]
    fn single_scatterer_equals_gbar() {
        let g = config(1, 1500);
        let acc = GreensAccuracy::new(1500, TailMode::Integral);
        let omega = 211.7;
        let out = reduce_full(&g, omega, &acc).unwrap();
        let expected = g.g_bar(0, omega, &acc).unwrap().value - g.scatterers().inverse_couplings[0];
        assert!((out[0] - expected).abs() < 1e-10);
    }

    #[test]
    fn reconstruction_matches_lambda_inverse() {
        for tail in [TailMode::None, TailMode::Integral] {
            let g = config(3, 800);
            let acc = GreensAccuracy::new(800, tail);
            let omega = 97.3;
            let decomp = SigmaDecomposition::new(&g, omega, &acc).unwrap();
            let direct = g.lambda_inverse(omega, &acc).unwrap();
            assert!((decomp.reconstruct() - direct).amax() < 1e-10);
        }
    }

    #[test]
    fn reduction_matches_dense() {
        let g = config(4, 2000);
        let acc = GreensAccuracy::new(2000, TailMode::Integral);
        let omega = 433.1;
        let summary = reduce_full_checked(&g, omega, &acc).unwrap();
        let direct = jacobi_eigen(&g.lambda_inverse(omega, &acc).unwrap());
        for (a, b) in summary.eigenvalues.iter().zip(direct.values.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert_eq!(summary.max_interlacing_excess, 0.0);
    }

    #[test]
    fn full_window_is_exact() {
        let g = config(3, 600);
        let acc = GreensAccuracy::new(600, TailMode::Integral);
        let decomp = SigmaDecomposition::new(&g, 55.5, &acc).unwrap();
        let approx = approximate_from(&decomp, &g, 600);
        let exact = jacobi_eigen(&decomp.reconstruct());
        assert_eq!(approx.eigenvalues(), exact.values.iter().cloned().collect::<Vec<_>>());
    }
}
