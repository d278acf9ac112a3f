//! Spectra of a rectangular quantum billiard with point scatterers.
//!
//! The unperturbed rectangle has closed-form modes ([`basis`]). Each
//! scatterer enters through the regularized Green's function `Ḡ(ω)` and the
//! matrix `λ⁻¹(ω)` ([`greens`]); perturbed levels are the zeros of its
//! eigenvalue curves ([`solver`]). [`extension`] checks the self-adjoint
//! extension behind the coupling, [`rankone`] rebuilds the eigenvalues of
//! `λ⁻¹(ω)` one rank-one term at a time, and [`stats`] covers unfolding,
//! spacing statistics and the strong-coupling band.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod error;
pub mod extension;
pub mod greens;
pub mod linalg;
pub mod rankone;
pub mod roots;
pub mod solver;
pub mod stats;
