//! Dirichlet eigenbasis of the empty rectangle.
//!
//! With `H0 = -Δ/2M` on `[0, Lx] × [0, Ly]` the eigenpairs are known in
//! closed form:
//!
//! ```text
//! ε(mx, my) = (π² / 2M) · (mx² / Lx² + my² / Ly²)
//! φ(x, y)   = 2/√(Lx·Ly) · sin(mx·π·x/Lx) · sin(my·π·y/Ly)
//! ```
//!
//! [`ModeTable`] enumerates them in energy order. Everything downstream
//! (Green's functions, solvers, statistics) reads from an immutable table.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest mode count a table may hold unless the caller raises the budget.
pub const DEFAULT_MODE_BUDGET: usize = 20_000_000;

/// The golden ratio, default aspect ratio `Ly / Lx`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// A point in the plane of the billiard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Geometry and mass of the unperturbed rectangular billiard (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardSpec {
    pub lx: f64,
    pub ly: f64,
    pub mass: f64,
}

impl BilliardSpec {
    pub fn new(lx: f64, ly: f64, mass: f64) -> Result<Self> {
        let spec = BilliardSpec { lx, ly, mass };
        spec.validate()?;
        Ok(spec)
    }

    /// `Lx = 1`, `Ly` = golden ratio, `M = 1`.
    pub fn golden() -> Self {
        BilliardSpec {
            lx: 1.0,
            ly: GOLDEN_RATIO,
            mass: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [("Lx", self.lx), ("Ly", self.ly), ("M", self.mass)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidBilliard(problems.join("; ")))
        }
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Closed-form eigenvalue for quantum numbers `(mx, my)`.
    pub fn energy(&self, mx: u32, my: u32) -> f64 {
        let kx = mx as f64 / self.lx;
        let ky = my as f64 / self.ly;
        PI * PI / (2.0 * self.mass) * (kx * kx + ky * ky)
    }

    /// Whether `p` lies in the closed rectangle.
    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.lx).contains(&p.x) && (0.0..=self.ly).contains(&p.y)
    }

    /// Whether `p` lies strictly inside the rectangle.
    pub fn contains_interior(&self, p: &Point) -> bool {
        p.x > 0.0 && p.x < self.lx && p.y > 0.0 && p.y < self.ly
    }

    /// Weyl mean level density `M·S / 2π`.
    pub fn weyl_density(&self) -> f64 {
        weyl_density(self)
    }

    /// Mean level spacing, `1 / ρ_av`.
    pub fn mean_spacing(&self) -> f64 {
        1.0 / weyl_density(self)
    }

    /// Number of modes with energy `<= e_cut`, counted without storing them.
    pub fn count_modes(&self, e_cut: f64) -> usize {
        if e_cut <= 0.0 {
            return 0;
        }
        let mut count = 0usize;
        let mx_max = self.max_quantum_number(self.lx, e_cut);
        for mx in 1..=mx_max {
            count += self.my_range(mx, e_cut).count_hint();
        }
        count
    }

    // Upper bound L·√(2M·e_cut)/π, padded by one to absorb rounding; the
    // exact energy test happens in `my_range`.
    fn max_quantum_number(&self, len: f64, e_cut: f64) -> u32 {
        (len * (2.0 * self.mass * e_cut).sqrt() / PI).floor() as u32 + 1
    }

    fn my_range(&self, mx: u32, e_cut: f64) -> MyRange {
        let kx = mx as f64 * PI / self.lx;
        let rest = 2.0 * self.mass * e_cut - kx * kx;
        if rest < 0.0 {
            return MyRange { last: 0 };
        }
        let mut last = (self.ly * rest.sqrt() / PI).floor() as u32 + 1;
        while last > 0 && self.energy(mx, last) > e_cut {
            last -= 1;
        }
        while self.energy(mx, last + 1) <= e_cut {
            last += 1;
        }
        MyRange { last }
    }
}

struct MyRange {
    last: u32,
}

impl MyRange {
    fn count_hint(&self) -> usize {
        self.last as usize
    }
}

/// One unperturbed eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub mx: u32,
    pub my: u32,
    pub energy: f64,
    /// 1-based rank in energy order.
    pub index: usize,
}

/// Energy-sorted table of the lowest unperturbed modes.
#[derive(Debug, Clone)]
pub struct ModeTable {
    spec: BilliardSpec,
    modes: Vec<Mode>,
    energies: Vec<f64>,
}

/// Enumerates every mode with energy `<= e_cut`, sorted by energy with ties
/// broken by `(mx, my)`.
pub fn build_mode_table(spec: BilliardSpec, e_cut: f64) -> Result<ModeTable> {
    ModeTable::build_with_budget(spec, e_cut, DEFAULT_MODE_BUDGET)
}

/// `φ_mode(p)` for a point in the closed rectangle.
pub fn eval_eigenfunction(spec: &BilliardSpec, mode: &Mode, p: &Point) -> Result<f64> {
    if !spec.contains(p) {
        return Err(Error::Contract(format!(
            "point ({}, {}) outside [0, {}] x [0, {}]",
            p.x, p.y, spec.lx, spec.ly
        )));
    }
    Ok(eigenfunction_unchecked(spec, mode.mx, mode.my, p))
}

#[inline]
pub(crate) fn eigenfunction_unchecked(spec: &BilliardSpec, mx: u32, my: u32, p: &Point) -> f64 {
    let norm = 2.0 / spec.area().sqrt();
    norm * (mx as f64 * PI * p.x / spec.lx).sin() * (my as f64 * PI * p.y / spec.ly).sin()
}

/// Weyl mean level density `ρ_av = M·S / 2π`, independent of energy in 2D.
pub fn weyl_density(spec: &BilliardSpec) -> f64 {
    spec.mass * spec.area() / (2.0 * PI)
}

impl ModeTable {
    pub fn build_with_budget(spec: BilliardSpec, e_cut: f64, budget: usize) -> Result<Self> {
        spec.validate()?;
        let ground = spec.energy(1, 1);
        if !(e_cut.is_finite() && e_cut > ground) {
            return Err(Error::CutoffTooLow { e_cut, ground });
        }
        let count = spec.count_modes(e_cut);
        if count > budget {
            return Err(Error::MemoryBudget {
                e_cut,
                count,
                budget,
            });
        }

        let mut raw: Vec<(f64, u32, u32)> = Vec::with_capacity(count);
        let mx_max = spec.max_quantum_number(spec.lx, e_cut);
        for mx in 1..=mx_max {
            let last = spec.my_range(mx, e_cut).last;
            for my in 1..=last {
                raw.push((spec.energy(mx, my), mx, my));
            }
        }
        raw.sort_unstable_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        let modes: Vec<Mode> = raw
            .into_iter()
            .enumerate()
            .map(|(i, (energy, mx, my))| Mode {
                mx,
                my,
                energy,
                index: i + 1,
            })
            .collect();
        let energies = modes.iter().map(|m| m.energy).collect();
        Ok(ModeTable {
            spec,
            modes,
            energies,
        })
    }

    /// Exactly the `n_max` lowest modes.
    pub fn lowest(spec: BilliardSpec, n_max: usize) -> Result<Self> {
        Self::lowest_with_budget(spec, n_max, DEFAULT_MODE_BUDGET)
    }

    pub fn lowest_with_budget(spec: BilliardSpec, n_max: usize, budget: usize) -> Result<Self> {
        spec.validate()?;
        if n_max == 0 {
            return Err(Error::InvalidAccuracy("n_max must be at least 1".into()));
        }
        if n_max > budget {
            return Err(Error::MemoryBudget {
                e_cut: f64::NAN,
                count: n_max,
                budget,
            });
        }
        let rho = weyl_density(&spec);
        let perimeter = 2.0 * (spec.lx + spec.ly);
        // Weyl's law with the perimeter correction, inverted loosely.
        let mut e_cut = (n_max as f64 + 10.0) / rho;
        e_cut += perimeter * (2.0 * spec.mass * e_cut).sqrt() / (4.0 * PI * rho);
        e_cut = e_cut.max(spec.energy(1, 1) * 1.5);
        while spec.count_modes(e_cut) < n_max {
            e_cut *= 1.25;
        }
        let mut table = Self::build_with_budget(spec, e_cut, budget.max(n_max))?;
        table.modes.truncate(n_max);
        table.energies.truncate(n_max);
        Ok(table)
    }

    pub fn spec(&self) -> &BilliardSpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Energy of the highest tabulated mode.
    pub fn cutoff_energy(&self) -> f64 {
        *self.energies.last().expect("mode table is never empty")
    }

    /// Number of modes with energy `<= e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.energies.partition_point(|&x| x <= e)
    }

    /// Index (0-based) of the tabulated energy nearest to `omega` among the
    /// first `n` modes.
    pub fn nearest_level(&self, omega: f64, n: usize) -> usize {
        let energies = &self.energies[..n.min(self.energies.len())];
        let pos = energies.partition_point(|&x| x < omega);
        if pos == 0 {
            0
        } else if pos >= energies.len() {
            energies.len() - 1
        } else if (omega - energies[pos - 1]) <= (energies[pos] - omega) {
            pos - 1
        } else {
            pos
        }
    }

    pub fn eigenfunction(&self, n: usize, p: &Point) -> Result<f64> {
        eval_eigenfunction(&self.spec, &self.modes[n], p)
    }

    /// Groups of equal energies among the first `n` modes, as half-open
    /// index ranges in table order.
    pub fn degenerate_groups(&self, n: usize) -> Vec<std::ops::Range<usize>> {
        let energies = &self.energies[..n.min(self.energies.len())];
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=energies.len() {
            if i == energies.len() || energies[i] != energies[start] {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }
}
