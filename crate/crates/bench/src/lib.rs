//! Shared fixtures for the criterion benches.

use zeropi::{CircuitParams, Grid2D};

/// Parameters deep in the degenerate regime (ħω_p/E_L = 10⁴,
/// ħω_p/E_CΣ = 2.2·10³, ħω_p/E_J = 7.9).
pub fn ridge_params() -> CircuitParams {
    CircuitParams::from_ratios(1e4, 2.2e3, 7.9, 0.0).expect("valid parameters")
}

/// A reduced grid that keeps a bench iteration under a second.
pub fn bench_grid() -> Grid2D {
    Grid2D::new(30.0, 301, 60).expect("valid grid")
}
