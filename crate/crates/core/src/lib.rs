//! Numerical model of the 0-π superconducting circuit.
//!
//! The crate builds the two-dimensional (φ, θ) Hamiltonian on a
//! finite-difference grid, extracts its lowest levels with a shift-invert
//! Krylov solver, and derives the degeneracy measure
//! `D = log₁₀((E₂ − E₀)/(E₁ − E₀))`, flux and parameter sweeps, junction
//! disorder spectra and the dispersive shifts from coupling to the χ mode.
//!
//! Energies are in units of ħω_p throughout.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod circuit;
pub mod dispersive;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod spectrum;

pub use circuit::{CircuitParams, DerivedScales, DisorderParams, NormalCoords};
pub use dispersive::{dispersive, Couplings, DispersiveResult};
pub use eigen::{lowest_eigenpairs, solve_refined, EigenSolution, SolverOptions};
pub use error::{Error, Result};
pub use grid::{assemble, default_grid, Grid2D, GridQuality, SparseHamiltonian};
pub use spectrum::{degeneracy, DegeneracyReport, PointStatus, SweepPoint, SweepResult, SweepSettings};
