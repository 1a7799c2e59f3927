//! Quantum mechanics as real-valued hydrodynamics on a periodic 1D grid.
//!
//! The wave function is traded for the pair (P, S) — probability density and
//! action — evolving under the continuity equation and the
//! Hamilton-Jacobi-Bohm equation. This crate provides:
//!
//! - spectral field calculus on periodic grids ([`field`], [`grid`]),
//! - the Madelung transform between psi and (P, S) with the zero-point
//!   fields S0, osmotic velocity and quantum potential ([`madelung`]),
//! - a split-step Schrödinger reference solver and closed-form oracle
//!   states ([`schrodinger`]),
//! - direct integration of the real-valued system with no complex
//!   amplitudes anywhere in the loop ([`hydro`]),
//! - residual diagnostics for every intermediate identity of the
//!   derivation chain ([`audit`]),
//! - Fisher-information uncertainty machinery ([`uncertainty`]),
//! - Bohmian trajectories and ensemble equivariance ([`trajectory`]),
//! - a free-particle Klein-Gordon solver with the relativistic
//!   Hamilton-Jacobi-Bohm checks ([`klein_gordon`]),
//! - a batch driver behind the `qhydro` binary ([`config`], [`driver`]).
//!
//! Fields are immutable values; every operation is a pure function, so
//! everything here is safe to share across threads.

pub mod audit;
pub mod config;
pub mod driver;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod hydro;
pub mod io;
pub mod klein_gordon;
pub mod madelung;
pub mod schrodinger;
pub mod trajectory;
pub mod uncertainty;

pub use error::{Error, Result};
pub use field::{DerivativeOrder, ScalarField, WaveField};
pub use grid::{GridSpec, PhysicalConstants};
pub use madelung::HydroState;
