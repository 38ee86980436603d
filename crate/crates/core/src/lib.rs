//! Double-null reformulation of the 1+1 timelike minimal surface equation.
//!
//! A graph `φ(t, x)` over Minkowski space `ℝ^{1,1}` sweeps out a timelike
//! minimal surface in `ℝ^{1,2}`. In null coordinates `(u, v)` on the surface
//! the induced metric is `e^ψ (du⊗dv + dv⊗du)`, the second fundamental form
//! is `λ du⊗du + ν dv⊗dv`, and the Gauss–Codazzi system collapses to
//!
//! * `λ = Λ(u)`, `ν = V(v)` (pure transport), and
//! * `∂²_{uv} ψ = e^{-ψ} λ ν` (a semilinear wave equation).
//!
//! Throughout the crate `r = u + v` and `t = u − v`, so `u = (r+t)/2`,
//! `v = (r−t)/2`, `∂_u = ∂_r + ∂_t`, `∂_v = ∂_r − ∂_t` and
//! `∂²_{uv} = ∂²_r − ∂²_t`.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the command
//! line live in the `nullsurf` companion crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN on purpose; stencils index several arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;

pub mod diagnostics;
pub mod evolution;
pub mod fields;
pub mod geometry;
pub mod graph_solver;
pub mod initial_data;
pub mod lattice;
pub mod reconstruction;
pub mod scenario;

pub use error::{Error, Result};
