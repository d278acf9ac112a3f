//! Perturbed eigenvalues and eigenfunctions.
//!
//! For one scatterer the eigenvalues solve `Ḡ(ω) = v̄⁻¹`. Between two
//! neighbouring poles `Ḡ` falls monotonically from `+∞` to `−∞`, so every
//! gap holds exactly one root, found by Brent's method on the gap.
//!
//! For `N` scatterers the eigenvalues are the zeros of `det λ⁻¹(ω)`. Between
//! poles `dλ⁻¹/dω` is negative semidefinite, so each *sorted* eigenvalue
//! curve `μ_k(ω)` of `λ⁻¹` is nonincreasing and crosses zero at most once.
//! Curves are sampled on a grid of at least `8·N` points per mean spacing,
//! checked for monotonicity, and every sign change is refined by Brent.
//!
//! Below the ground state `Ḡ` rises to `+∞` as `ω → −∞`, so one extra root
//! per scatterer can sit below `ε_1` (the two-dimensional bound state). It is
//! searched by stepping down geometrically from `ε_1` to the window floor.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::ModeTable;
use crate::error::{Error, Result};
use crate::greens::{Greens, GreensAccuracy};
use crate::linalg::{jacobi_eigen, positive_count};
use crate::roots::brent;

const MAX_BRENT_ITER: usize = 200;

/// Closed energy interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || !hi.is_finite() {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(EnergyWindow { lo, hi })
    }

    /// Window spanning unperturbed levels `first..=last` (1-based).
    pub fn from_levels(table: &ModeTable, first: usize, last: usize) -> Result<Self> {
        if first == 0 || last <= first || last > table.len() {
            return Err(Error::Contract(format!(
                "level range {first}..={last} invalid for {} modes",
                table.len()
            )));
        }
        Self::new(table.energies()[first - 1], table.energies()[last - 1])
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

/// Where a perturbed level sits relative to the unperturbed spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelKind {
    /// Inside the gap between two neighbouring poles.
    BetweenPoles,
    /// Below the lowest pole.
    BelowGround,
    /// An unperturbed level whose eigenfunctions vanish at every
    /// scatterer (or a degenerate level of excess multiplicity).
    Unshifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLevel {
    pub omega: f64,
    /// Poles (or window edges) enclosing the root.
    pub bracket: (f64, f64),
    pub kind: LevelKind,
    /// Newton estimate `|f(ω)| / |f'(ω)|` of the distance to the exact root.
    pub residual: f64,
    pub multiplicity: usize,
}

/// Root-finder settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Absolute tolerance on each root.
    pub tol: f64,
    /// Grid points per mean spacing per scatterer for curve sampling.
    pub grid_per_spacing: usize,
    /// Permit searching inside the pole-exclusion band when a root is
    /// squeezed against a pole.
    pub allow_pole_shrink: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            grid_per_spacing: 8,
            allow_pole_shrink: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Non-fatal findings collected while solving.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub gaps_searched: usize,
    /// Roots that sat inside the default pole-exclusion band.
    pub pole_conflicts: Vec<String>,
    pub notes: Vec<String>,
    pub max_residual: f64,
    pub grid_refinements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub levels: Vec<PerturbedLevel>,
    pub diagnostics: Diagnostics,
}

impl SpectrumResult {
    /// Eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.omega, l.multiplicity))
            .collect()
    }
}

/// Distinct pole energies and unshifted levels of the truncated problem.
#[derive(Debug, Clone, Default)]
pub struct PoleStructure {
    /// Energies where `λ⁻¹` has a pole, ascending, with residue rank.
    pub poles: Vec<(f64, usize)>,
    /// Energies that stay eigenvalues, with multiplicity.
    pub unshifted: Vec<(f64, usize)>,
}

impl PoleStructure {
    pub fn of(greens: &Greens, n_max: usize) -> Self {
        let table = greens.table();
        let n_sc = greens.len();
        let amplitude = 2.0 / table.spec().area().sqrt();
        let node_tol = 1e-10 * amplitude;
        let mut out = PoleStructure::default();
        for group in table.degenerate_groups(n_max) {
            let e = table.energies()[group.start];
            let m = group.len();
            let rows = DMatrix::from_fn(m, n_sc.max(1), |r, c| {
                if c < n_sc {
                    greens.source().values(c)[group.start + r]
                } else {
                    0.0
                }
            });
            let rank = if n_sc == 0 {
                0
            } else if m == 1 {
                usize::from(rows.iter().any(|v| v.abs() > node_tol))
            } else {
                rows.svd(false, false).rank(node_tol)
            };
            if rank > 0 {
                out.poles.push((e, rank));
            }
            if m > rank {
                out.unshifted.push((e, m - rank));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    a_pole: bool,
    b_pole: bool,
    below_ground: bool,
}

fn intervals(poles: &[(f64, usize)], window: &EnergyWindow, band: f64) -> Vec<Interval> {
    let mut lo = window.lo;
    let mut hi = window.hi;
    let mut lo_pole = false;
    let mut hi_pole = false;
    for &(p, _) in poles {
        if (lo - p).abs() <= band {
            lo = p;
            lo_pole = true;
        }
        if (hi - p).abs() <= band {
            hi = p;
            hi_pole = true;
        }
    }
    let inner: Vec<f64> = poles
        .iter()
        .map(|&(p, _)| p)
        .filter(|&p| p > lo && p < hi)
        .collect();
    let first_pole = poles.first().map(|&(p, _)| p);
    let mut edges = Vec::with_capacity(inner.len() + 2);
    edges.push((lo, lo_pole));
    edges.extend(inner.iter().map(|&p| (p, true)));
    edges.push((hi, hi_pole));
    edges
        .windows(2)
        .map(|w| Interval {
            a: w[0].0,
            b: w[1].0,
            a_pole: w[0].1,
            b_pole: w[1].1,
            below_ground: first_pole.is_some_and(|p| w[1].0 <= p),
        })
        .filter(|iv| iv.b > iv.a)
        .collect()
}

fn check_window(greens: &Greens, window: &EnergyWindow, acc: &GreensAccuracy) -> Result<()> {
    greens.check_accuracy(acc)?;
    let cutoff = greens.table().energies()[acc.n_max - 1];
    if window.hi >= cutoff {
        return Err(Error::InvalidWindow {
            lo: window.lo,
            hi: window.hi,
        });
    }
    Ok(())
}

fn unshifted_levels(structure: &PoleStructure, window: &EnergyWindow) -> Vec<PerturbedLevel> {
    structure
        .unshifted
        .iter()
        .filter(|(e, _)| window.contains(*e))
        .map(|&(e, m)| PerturbedLevel {
            omega: e,
            bracket: (e, e),
            kind: LevelKind::Unshifted,
            residual: 0.0,
            multiplicity: m,
        })
        .collect()
}

fn finish(mut levels: Vec<PerturbedLevel>, mut diagnostics: Diagnostics) -> SpectrumResult {
    levels.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    diagnostics.max_residual = levels.iter().map(|l| l.residual).fold(0.0, f64::max);
    SpectrumResult { levels, diagnostics }
}

/// Spectrum of a single scatterer in `window`.
pub fn solve_single(greens: &Greens, window: &EnergyWindow, acc: &GreensAccuracy, opts: &SolverOptions) -> Result<SpectrumResult> {
    if greens.len() != 1 {
        return Err(Error::Contract(format!(
            "solve_single needs exactly one scatterer, got {}",
            greens.len()
        )));
    }
    check_window(greens, window, acc)?;
    let structure = PoleStructure::of(greens, acc.n_max);
    let band = acc.pole_exclusion * greens.table().spec().mean_spacing();
    let ivs = intervals(&structure.poles, window, band);
    let vbar_inv = greens.scatterers().inverse_couplings[0];

    let results: Vec<Result<(Option<PerturbedLevel>, Option<String>)>> = ivs
        .par_iter()
        .map(|iv| solve_single_interval(greens, iv, vbar_inv, acc, opts, band))
        .collect();

    let mut levels = unshifted_levels(&structure, window);
    let mut diagnostics = Diagnostics {
        gaps_searched: ivs.len(),
        ..Default::default()
    };
    for r in results {
        let (level, conflict) = r?;
        levels.extend(level);
        diagnostics.pole_conflicts.extend(conflict);
    }
    Ok(finish(levels, diagnostics))
}

fn solve_single_interval(
    greens: &Greens,
    iv: &Interval,
    vbar_inv: f64,
    acc: &GreensAccuracy,
    opts: &SolverOptions,
    band: f64,
) -> Result<(Option<PerturbedLevel>, Option<String>)> {
    let f = |w: f64| greens.g_bar_unchecked(0, w, acc) - vbar_inv;
    let spacing = greens.table().spec().mean_spacing();

    let squeezed = |pole: f64, side: f64, d: f64| {
        let kind = if iv.below_ground {
            LevelKind::BelowGround
        } else {
            LevelKind::BetweenPoles
        };
        let level = PerturbedLevel {
            omega: pole + side * 0.5 * d,
            bracket: (iv.a, iv.b),
            kind,
            residual: d,
            multiplicity: 1,
        };
        let note = format!("root within {d:e} of pole {pole}; placed at the midpoint");
        Ok((Some(level), Some(note)))
    };

    let mut conflict = None;
    let mut a_eval = if iv.a_pole { iv.a + band } else { iv.a };
    let mut fa = f(a_eval);
    if iv.a_pole && !(fa > 0.0) && opts.allow_pole_shrink {
        match shrink_toward_pole(&f, iv.a, 1.0, band) {
            (x, fx, d, true) => {
                (a_eval, fa) = (x, fx);
                conflict = Some(format!("root squeezed within {d:e} above pole {}", iv.a));
            }
            (_, _, d, false) => return squeezed(iv.a, 1.0, d),
        }
    }

    // right end; below the ground state step down geometrically first
    let mut b_eval = if iv.b_pole { iv.b - band } else { iv.b };
    let mut fb = f(b_eval);
    if iv.b_pole && !(fb < 0.0) && opts.allow_pole_shrink {
        match shrink_toward_pole(&f, iv.b, -1.0, band) {
            (x, fx, d, true) => {
                (b_eval, fb) = (x, fx);
                conflict = Some(format!("root squeezed within {d:e} below pole {}", iv.b));
            }
            (_, _, d, false) => return squeezed(iv.b, -1.0, d),
        }
    }
    if iv.below_ground && !iv.a_pole && fb < 0.0 {
        let mut step = spacing;
        let mut hi_pt = b_eval;
        loop {
            let x = (iv.b - step).max(iv.a);
            let fx = f(x);
            if fx > 0.0 || x <= iv.a {
                if fx > 0.0 {
                    a_eval = x;
                    fa = fx;
                    b_eval = hi_pt;
                    fb = f(hi_pt);
                } else {
                    a_eval = x;
                    fa = fx;
                }
                break;
            }
            hi_pt = x;
            step *= 2.0;
        }
    }

    if !(fa > 0.0 && fb < 0.0) {
        if iv.a_pole && iv.b_pole {
            return Err(Error::MissingRoot {
                lo: iv.a,
                hi: iv.b,
                reason: format!("no sign change: f(lo)={fa:e}, f(hi)={fb:e}"),
            });
        }
        return Ok((None, None));
    }

    // Multiply out the pole factors so Brent sees a smooth function.
    let reg = |w: f64| {
        let mut v = f(w);
        if iv.a_pole {
            v *= w - iv.a;
        }
        if iv.b_pole {
            v *= iv.b - w;
        }
        v
    };
    let found = brent(reg, a_eval, b_eval, reg(a_eval), reg(b_eval), opts.tol, MAX_BRENT_ITER).ok_or_else(|| {
        Error::MissingRoot {
            lo: iv.a,
            hi: iv.b,
            reason: "Brent iteration did not converge".into(),
        }
    })?;
    let omega = found.root;
    let slope = greens.g_bar_derivative_unchecked(0, omega, acc);
    let residual = (f(omega) / slope).abs();
    let kind = if iv.below_ground {
        LevelKind::BelowGround
    } else {
        LevelKind::BetweenPoles
    };
    Ok((
        Some(PerturbedLevel {
            omega,
            bracket: (iv.a, iv.b),
            kind,
            residual,
            multiplicity: 1,
        }),
        conflict,
    ))
}

// Moves the evaluation point from `pole ± band` toward the pole until `f`
// has the sign it must have next to that pole (+ above, − below), stopping
// a few ulps away. Returns the point, `f` there, its distance, and whether
// the sign was reached.
fn shrink_toward_pole(f: &impl Fn(f64) -> f64, pole: f64, side: f64, band: f64) -> (f64, f64, f64, bool) {
    let floor = 4.0 * f64::EPSILON * pole.abs().max(f64::MIN_POSITIVE);
    let mut d = band;
    loop {
        d = (0.1 * d).max(floor);
        let x = pole + side * d;
        let fx = f(x);
        if fx * side > 0.0 {
            return (x, fx, d, true);
        }
        if d <= floor {
            return (x, fx, d, false);
        }
    }
}

/// Sorted eigenvalues of `λ⁻¹(ω)` and the matching eigenvectors.
fn curve_values(greens: &Greens, omega: f64, acc: &GreensAccuracy) -> crate::linalg::SymmetricEigen {
    let (m, _) = greens.lambda_inverse_unchecked(omega, acc, false);
    jacobi_eigen(&m)
}

/// Spectrum of `N >= 1` scatterers from `det λ⁻¹(ω) = 0`.
pub fn solve_multi(greens: &Greens, window: &EnergyWindow, acc: &GreensAccuracy, opts: &SolverOptions) -> Result<SpectrumResult> {
    if greens.is_empty() {
        return Err(Error::Contract("solve_multi needs at least one scatterer".into()));
    }
    check_window(greens, window, acc)?;
    let structure = PoleStructure::of(greens, acc.n_max);
    let band = acc.pole_exclusion * greens.table().spec().mean_spacing();
    let ivs = intervals(&structure.poles, window, band);

    let results: Vec<Result<(Vec<PerturbedLevel>, usize)>> = ivs
        .par_iter()
        .map(|iv| solve_multi_interval(greens, iv, acc, opts, band))
        .collect();

    let mut levels = unshifted_levels(&structure, window);
    let mut diagnostics = Diagnostics {
        gaps_searched: ivs.len(),
        ..Default::default()
    };
    for r in results {
        let (found, refinements) = r?;
        levels.extend(found);
        diagnostics.grid_refinements += refinements;
    }
    Ok(finish(levels, diagnostics))
}

fn solve_multi_interval(
    greens: &Greens,
    iv: &Interval,
    acc: &GreensAccuracy,
    opts: &SolverOptions,
    band: f64,
) -> Result<(Vec<PerturbedLevel>, usize)> {
    let n = greens.len();
    let spacing = greens.table().spec().mean_spacing();
    let mut a_eval = if iv.a_pole { iv.a + band } else { iv.a };
    let b_eval = if iv.b_pole { iv.b - band } else { iv.b };

    let mut top = curve_values(greens, b_eval, acc);
    let k_b = positive_count(&top.values);
    let mut bottom = curve_values(greens, a_eval, acc);
    let mut k_a = positive_count(&bottom.values);

    // Below the ground state the curves rise as ω decreases; step down
    // until every bound state is enclosed or the floor is reached.
    if iv.below_ground && !iv.a_pole {
        let mut step = spacing;
        loop {
            let x = (iv.b - step).max(iv.a);
            let e = curve_values(greens, x, acc);
            let k = positive_count(&e.values);
            if k == n || x <= iv.a {
                a_eval = x;
                bottom = e;
                k_a = k;
                break;
            }
            step *= 2.0;
        }
    }
    if k_a <= k_b {
        return Ok((Vec::new(), 0));
    }
    // sorted indices whose curve crosses zero
    let crossing: Vec<usize> = (n - k_a..n - k_b).collect();

    let mut refinements = 0;
    let mut per_spacing = (opts.grid_per_spacing.max(8) * n) as f64;
    let (grid, values) = loop {
        let cells = (((b_eval - a_eval) / spacing) * per_spacing).ceil().max(2.0) as usize;
        let grid: Vec<f64> = (0..=cells)
            .map(|c| {
                if c == cells {
                    b_eval
                } else {
                    a_eval + (b_eval - a_eval) * c as f64 / cells as f64
                }
            })
            .collect();
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
        values.push(bottom.values.iter().cloned().collect());
        for &x in &grid[1..cells] {
            values.push(curve_values(greens, x, acc).values.iter().cloned().collect());
        }
        values.push(top.values.iter().cloned().collect());

        let monotone = crossing.iter().all(|&k| {
            values.windows(2).all(|w| {
                let scale = w[0][k].abs().max(w[1][k].abs()).max(1.0);
                w[1][k] <= w[0][k] + 1e-9 * scale
            })
        });
        if monotone {
            break (grid, values);
        }
        refinements += 1;
        if refinements > 1 {
            return Err(Error::CurveTracking { lo: iv.a, hi: iv.b });
        }
        per_spacing *= 4.0;
    };
    top = curve_values(greens, b_eval, acc);

    let mut roots: Vec<(f64, f64)> = Vec::with_capacity(crossing.len());
    for &k in &crossing {
        let cell = values
            .windows(2)
            .position(|w| w[0][k] > 0.0 && w[1][k] <= 0.0)
            .ok_or(Error::CurveTracking { lo: iv.a, hi: iv.b })?;
        let (lo, hi) = (grid[cell], grid[cell + 1]);
        let mu = |w: f64| curve_values(greens, w, acc).values[k];
        let found = brent(mu, lo, hi, values[cell][k], values[cell + 1][k], opts.tol, MAX_BRENT_ITER).ok_or_else(|| {
            Error::MissingRoot {
                lo,
                hi,
                reason: format!("eigenvalue curve {k} did not converge"),
            }
        })?;
        let omega = found.root;
        let (m, dm) = greens.lambda_inverse_unchecked(omega, acc, true);
        let eig = jacobi_eigen(&m);
        let u = eig.vectors.column(k);
        let slope = (u.transpose() * dm.expect("derivative") * u)[(0, 0)];
        roots.push((omega, (eig.values[k] / slope).abs()));
    }
    let _ = top;

    let kind = if iv.below_ground {
        LevelKind::BelowGround
    } else {
        LevelKind::BetweenPoles
    };
    let mut levels: Vec<PerturbedLevel> = Vec::new();
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (omega, residual) in roots {
        match levels.last_mut() {
            Some(last) if (omega - last.omega).abs() <= 10.0 * opts.tol => {
                last.multiplicity += 1;
                last.residual = last.residual.max(residual);
            }
            _ => levels.push(PerturbedLevel {
                omega,
                bracket: (iv.a, iv.b),
                kind,
                residual,
                multiplicity: 1,
            }),
        }
    }
    Ok((levels, refinements))
}

/// Dispatches to [`solve_single`] or [`solve_multi`]; with no scatterers
/// returns the unperturbed levels in the window.
pub fn solve(greens: &Greens, window: &EnergyWindow, acc: &GreensAccuracy, opts: &SolverOptions) -> Result<SpectrumResult> {
    match greens.len() {
        0 => {
            check_window(greens, window, acc)?;
            let table = greens.table();
            let groups = table.degenerate_groups(acc.n_max);
            let levels = groups
                .into_iter()
                .map(|g| (table.energies()[g.start], g.len()))
                .filter(|(e, _)| window.contains(*e))
                .map(|(e, m)| PerturbedLevel {
                    omega: e,
                    bracket: (e, e),
                    kind: LevelKind::Unshifted,
                    residual: 0.0,
                    multiplicity: m,
                })
                .collect();
            Ok(finish(levels, Diagnostics::default()))
        }
        1 => solve_single(greens, window, acc, opts),
        _ => solve_multi(greens, window, acc, opts),
    }
}

/// Single-scatterer eigenfunction `ψ = N·Σ_k φ_k(x_1)/(ω − ε_k)·φ_k`.
#[derive(Debug, Clone)]
pub struct EigenfunctionRep {
    pub level: PerturbedLevel,
    /// Expansion coefficients in the unperturbed basis, `k < n_max`.
    pub coefficients: Vec<f64>,
    pub normalization: f64,
    /// Estimated norm carried by modes above the truncation.
    pub truncation_remainder: f64,
    table: Arc<ModeTable>,
}

impl EigenfunctionRep {
    pub fn evaluate(&self, p: &crate::basis::Point) -> Result<f64> {
        let spec = self.table.spec();
        if !spec.contains(p) {
            return Err(Error::Contract(format!("point ({}, {}) outside the billiard", p.x, p.y)));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(self.table.modes())
            .map(|(c, m)| c * crate::basis::eigenfunction_unchecked(spec, m.mx, m.my, p))
            .sum())
    }

    /// `⟨ψ, φ_k⟩` for 0-based mode index `k`.
    pub fn overlap(&self, k: usize) -> f64 {
        self.coefficients.get(k).copied().unwrap_or(0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

pub fn build_eigenfunction(level: &PerturbedLevel, greens: &Greens, acc: &GreensAccuracy) -> Result<EigenfunctionRep> {
    if greens.len() != 1 {
        return Err(Error::Contract("eigenfunctions are built for a single scatterer only".into()));
    }
    greens.check_accuracy(acc)?;
    greens.check_pole_distance(level.omega, acc)?;
    let phi = &greens.source().values(0)[..acc.n_max];
    let energies = &greens.table().energies()[..acc.n_max];
    let raw: Vec<f64> = phi
        .iter()
        .zip(energies)
        .map(|(p, e)| p / (level.omega - e))
        .collect();
    let truncated: f64 = raw.iter().map(|r| r * r).sum();
    let remainder = match acc.tail {
        crate::greens::TailMode::None => 0.0,
        crate::greens::TailMode::Integral => {
            greens.local_density() / (energies[acc.n_max - 1] - level.omega).abs()
        }
    };
    let normalization = 1.0 / (truncated + remainder).sqrt();
    Ok(EigenfunctionRep {
        level: *level,
        coefficients: raw.iter().map(|r| normalization * r).collect(),
        normalization,
        truncation_remainder: remainder / (truncated + remainder),
        table: greens.table_arc().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BilliardSpec, Point};
    use crate::greens::{ScattererSet, TailMode};

    fn single(n: usize, vbar_inv: f64) -> Greens {
        let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), n).unwrap());
        Greens::new(table, ScattererSet::single(Point::new(0.3137, 0.5279), vbar_inv, 1.0)).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(EnergyWindow::new(2.0, 1.0).is_err());
        assert!(EnergyWindow::new(f64::NAN, 1.0).is_err());
        let g = single(200, 0.5);
        let acc = GreensAccuracy::new(200, TailMode::Integral);
        let w = EnergyWindow::new(10.0, 1e6).unwrap();
        assert!(matches!(
            solve_single(&g, &w, &acc, &SolverOptions::default()),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn one_root_per_gap() {
        let g = single(3000, 0.5);
        let acc = GreensAccuracy::new(3000, TailMode::Integral);
        let w = EnergyWindow::from_levels(g.table(), 100, 200).unwrap();
        let res = solve_single(&g, &w, &acc, &SolverOptions::default()).unwrap();
        assert_eq!(res.levels.len(), 100);
        let e = g.table().energies();
        for (k, level) in res.levels.iter().enumerate() {
            assert!(e[99 + k] < level.omega && level.omega < e[100 + k]);
            assert!(level.residual <= 1e-9);
        }
    }

    #[test]
    fn bound_state_below_ground() {
        for vbar_inv in [-0.8, 0.3] {
            let g = single(2000, vbar_inv);
            let acc = GreensAccuracy::new(2000, TailMode::Integral);
            let e1 = g.table().energies()[0];
            let w = EnergyWindow::new(-1e6, e1).unwrap();
            let res = solve_single(&g, &w, &acc, &SolverOptions::default()).unwrap();
            assert_eq!(res.levels.len(), 1, "vbar_inv={vbar_inv}");
            assert_eq!(res.levels[0].kind, LevelKind::BelowGround);
            assert!(res.levels[0].omega < e1);
        }
    }

    #[test]
    fn empty_set_echoes_unperturbed() {
        let table = Arc::new(ModeTable::lowest(BilliardSpec::golden(), 500).unwrap());
        let g = Greens::new(table.clone(), ScattererSet::empty(1.0)).unwrap();
        let acc = GreensAccuracy::new(500, TailMode::Integral);
        let w = EnergyWindow::new(0.0, table.energies()[99]).unwrap();
        let res = solve(&g, &w, &acc, &SolverOptions::default()).unwrap();
        assert_eq!(res.eigenvalues(), table.energies()[..100].to_vec());
    }

    #[test]
    fn square_center_leaves_odd_modes_alone() {
        // At the centre of the unit square every mode with an even quantum
        // number vanishes, so those levels stay put.
        let spec = BilliardSpec::new(1.0, 1.0, 1.0).unwrap();
        let table = Arc::new(ModeTable::lowest(spec, 400).unwrap());
        let g = Greens::new(table.clone(), ScattererSet::single(Point::new(0.5, 0.5), 0.2, 1.0)).unwrap();
        let structure = PoleStructure::of(&g, 400);
        for &(e, m) in &structure.unshifted {
            let group: Vec<_> = table.modes().iter().filter(|md| md.energy == e).collect();
            let nodal = group.iter().filter(|md| md.mx % 2 == 0 || md.my % 2 == 0).count();
            assert_eq!(m, nodal.max(group.len() - 1).min(group.len()), "e={e}");
        }
    }
}
