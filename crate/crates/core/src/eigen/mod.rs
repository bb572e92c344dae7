//! Lowest eigenpairs of the sparse Hamiltonian.
//!
//! The solver runs a restarted block Krylov iteration on the shift-inverted
//! operator `(H − σ)⁻¹`, with σ just below the spectrum so the banded Cholesky
//! factor exists. Converged Ritz vectors are re-projected onto `H` itself
//! before residuals are measured, so reported residuals are those of `H`.
//! Blocks of at least two vectors keep both members of exact doublets.

pub mod banded;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CircuitParams, DisorderParams};
use crate::error::{Error, Result};
use crate::grid::{assemble_model, default_grid, dot, Grid2D, GridQuality, PotentialModel, SparseHamiltonian};

pub use banded::BandCholesky;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Bound on `‖Hv − Ev‖` for unit coefficient vectors `v`.
    pub tol: f64,
    pub block_size: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Spectral shift; defaults to slightly below zero since `H ≥ 0`.
    pub shift: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            block_size: 4,
            max_restarts: 60,
            seed: 0x0e1d_5eed,
            shift: None,
        }
    }
}

/// Lowest-k spectrum on a grid.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// Ascending, units of ħω_p.
    pub energies: Vec<f64>,
    /// Grid vectors normalized so that `Σ|ψ|²ΔφΔθ = 1`.
    pub wavefunctions: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    /// `|E(refined) − E(base)|` per level, when a two-grid solve was run.
    pub disc_error: Option<Vec<f64>>,
    /// Energies on the base grid of a two-grid solve.
    pub coarse_energies: Option<Vec<f64>>,
    /// Levels whose `disc_error` exceeds the caller's bound.
    pub flagged: Vec<usize>,
    pub grid: Grid2D,
}

impl EigenSolution {
    pub fn k(&self) -> usize {
        self.energies.len()
    }

    /// Discretization error of `E_j − E_i` from the two-grid comparison.
    pub fn gap_disc_error(&self, i: usize, j: usize) -> Option<f64> {
        let coarse = self.coarse_energies.as_ref()?;
        let fine = (self.energies[j] - self.energies[i]).abs();
        let base = (coarse[j] - coarse[i]).abs();
        Some((fine - base).abs())
    }
}

const DEFAULT_SHIFT: f64 = -1e-3;
const MAX_RETARGETS: usize = 3;

fn factor_with_fallback(h: &SparseHamiltonian, shift: Option<f64>) -> Result<(BandCholesky, f64)> {
    if let Some(s) = shift {
        return BandCholesky::factor(h, s).map(|f| (f, s));
    }
    let mut s = DEFAULT_SHIFT;
    let mut last = None;
    for _ in 0..8 {
        match BandCholesky::factor(h, s) {
            Ok(f) => return Ok((f, s)),
            Err(e) => last = Some(e),
        }
        s *= 10.0;
    }
    Err(last.expect("loop ran"))
}

/// Orthonormalizes `w` against `basis` and the previously accepted vectors
/// of `block`. Returns `None` if nothing independent is left.
fn orthonormalize(basis: &[Vec<f64>], block: &[Vec<f64>], mut w: Vec<f64>) -> Option<Vec<f64>> {
    let norm0 = dot(&w, &w).sqrt();
    if norm0 == 0.0 || !norm0.is_finite() {
        return None;
    }
    for _ in 0..2 {
        for v in basis.iter().chain(block) {
            let c = dot(v, &w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
    }
    let norm = dot(&w, &w).sqrt();
    if norm <= 1e-10 * norm0 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= norm);
    Some(w)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `basis · coeffs[:, col]`
fn combine(basis: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (j, v) in basis.iter().enumerate() {
        let c = coeffs[(j, col)];
        if c != 0.0 {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
    }
    out
}

/// Eigen-decomposition of a small symmetric matrix, ascending.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

struct RitzCheck {
    energies: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

/// Rayleigh–Ritz with `H` on the span of `ys`, followed by true residuals.
fn project_onto_h(h: &SparseHamiltonian, ys: &[Vec<f64>]) -> RitzCheck {
    let k = ys.len();
    let hy: Vec<Vec<f64>> = ys.iter().map(|y| h.apply(y)).collect();
    let g = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&ys[i], &hy[j]) + dot(&ys[j], &hy[i])));
    let (vals, vecs) = sorted_eigen(g);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for c in 0..k {
        let z = combine(ys, &vecs, c);
        let hz = combine(&hy, &vecs, c);
        let nz = dot(&z, &z).sqrt();
        let r: f64 = hz
            .iter()
            .zip(&z)
            .map(|(a, b)| {
                let t = a - vals[c] * b;
                t * t
            })
            .sum::<f64>()
            .sqrt();
        residuals.push(r / nz);
        vectors.push(z.into_iter().map(|x| x / nz).collect());
    }
    RitzCheck {
        energies: vals,
        vectors,
        residuals,
    }
}

/// The `k` smallest eigenpairs of `h` with residuals at most `opts.tol`.
pub fn lowest_eigenpairs(h: &SparseHamiltonian, k: usize, opts: &SolverOptions) -> Result<EigenSolution> {
    let n = h.dimension();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k <= {n}, got {k}"),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {}", opts.tol),
        });
    }
    let bs = opts.block_size.max(2).min(n);
    let (mut chol, mut shift) = factor_with_fallback(h, opts.shift)?;
    let mut retargets_left = if opts.shift.is_some() { 0 } else { MAX_RETARGETS };

    let max_basis = (2 * k + 4 * bs).max(k + 2 * bs).min(n);
    let keep = (k + bs).min(max_basis.saturating_sub(bs)).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut pending: Vec<Vec<f64>> = (0..bs).map(|_| random_vector(&mut rng, n)).collect();
    let mut best: Option<RitzCheck> = None;

    for _restart in 0..opts.max_restarts {
        while basis.len() < max_basis {
            let room = max_basis - basis.len();
            let mut block: Vec<Vec<f64>> = Vec::new();
            for w in pending.drain(..) {
                if block.len() == room {
                    break;
                }
                if let Some(v) = orthonormalize(&basis, &block, w) {
                    block.push(v);
                }
            }
            if block.is_empty() {
                // Krylov space exhausted; top up with a fresh direction if any remain.
                if basis.len() < n {
                    let w = random_vector(&mut rng, n);
                    if let Some(v) = orthonormalize(&basis, &block, w) {
                        block.push(v);
                    }
                }
                if block.is_empty() {
                    break;
                }
            }
            for v in block {
                let mut av = v.clone();
                chol.solve_in_place(&mut av);
                pending.push(av.clone());
                basis.push(v);
                images.push(av);
            }
        }
        pending.clear();

        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
        });
        let (vals, vecs) = sorted_eigen(t);
        // Largest eigenvalues of the inverse are the lowest of H.
        let take = keep.min(m);
        let cols: Vec<usize> = (0..take).map(|c| m - 1 - c).collect();
        let ritz: Vec<Vec<f64>> = cols.iter().map(|&c| combine(&basis, &vecs, c)).collect();
        let ritz_images: Vec<Vec<f64>> = cols.iter().map(|&c| combine(&images, &vecs, c)).collect();

        let check = project_onto_h(h, &ritz[..k]);
        let worst = check.residuals.iter().cloned().fold(0.0, f64::max);
        let better = best
            .as_ref()
            .is_none_or(|b| worst < b.residuals.iter().cloned().fold(0.0, f64::max));
        let done = worst <= opts.tol || m == n;
        let e0 = check.energies[0];
        if better || done {
            best = Some(check);
        }
        if done {
            break;
        }

        // Move the shift up under the lowest Ritz value. The factorization
        // succeeding certifies σ < E₀; on failure the shift backs off.
        if retargets_left > 0 && take > k {
            let e_next = shift + 1.0 / vals[cols[k]];
            let margin = (0.5 * (e_next - e0)).max(1e-9 * (1.0 + e0.abs()));
            let target = e0 - margin;
            if e0 - target < 0.5 * (e0 - shift) {
                retargets_left -= 1;
                let mut trial = target;
                for step in 0..6 {
                    if trial <= shift {
                        break;
                    }
                    if let Ok(f) = BandCholesky::factor(h, trial) {
                        chol = f;
                        shift = trial;
                        basis.clear();
                        images.clear();
                        pending = ritz.clone();
                        break;
                    }
                    trial -= margin * f64::powi(2.0, step + 1);
                }
                if basis.is_empty() {
                    continue;
                }
            }
        }

        // Restart on the retained Ritz pairs, expanding with residuals of the
        // wanted ones, largest first.
        let mut inv_res: Vec<(f64, Vec<f64>)> = (0..k)
            .map(|i| {
                let theta = vals[cols[i]];
                let r: Vec<f64> = ritz_images[i]
                    .iter()
                    .zip(&ritz[i])
                    .map(|(a, y)| a - theta * y)
                    .collect();
                (dot(&r, &r), r)
            })
            .collect();
        inv_res.sort_by(|a, b| b.0.total_cmp(&a.0));
        basis = ritz;
        images = ritz_images;
        pending = inv_res.into_iter().take(bs).map(|(_, r)| r).collect();
    }

    let best = best.expect("at least one restart ran");
    let worst = best.residuals.iter().cloned().fold(0.0, f64::max);
    if worst > opts.tol && basis.len() < n {
        return Err(Error::NoConvergence {
            iterations: opts.max_restarts,
            residuals: best.residuals,
        });
    }
    let scale = 1.0 / h.grid().cell_area().sqrt();
    let wavefunctions = best
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| x * scale).collect())
        .collect();
    Ok(EigenSolution {
        energies: best.energies,
        wavefunctions,
        residual_norms: best.residuals,
        disc_error: None,
        coarse_energies: None,
        flagged: Vec::new(),
        grid: *h.grid(),
    })
}

/// Solves on `base` and on `refined` and attaches the level-wise
/// discretization error. Reported energies and states are from `refined`.
#[allow(clippy::too_many_arguments)]
pub fn solve_on_grids(
    p: &CircuitParams,
    d: &DisorderParams,
    model: PotentialModel,
    k: usize,
    base: &Grid2D,
    refined: &Grid2D,
    opts: &SolverOptions,
    error_bound: Option<f64>,
) -> Result<EigenSolution> {
    let coarse = lowest_eigenpairs(&assemble_model(p, d, base, model)?, k, opts)?;
    let mut fine = if base == refined {
        coarse.clone()
    } else {
        lowest_eigenpairs(&assemble_model(p, d, refined, model)?, k, opts)?
    };
    let err: Vec<f64> = fine
        .energies
        .iter()
        .zip(&coarse.energies)
        .map(|(a, b)| (a - b).abs())
        .collect();
    if let Some(bound) = error_bound {
        fine.flagged = err
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > bound)
            .map(|(i, _)| i)
            .collect();
    }
    fine.disc_error = Some(err);
    fine.coarse_energies = Some(coarse.energies);
    Ok(fine)
}

/// Two-grid solve at `quality` and its refinement.
pub fn solve_refined(
    p: &CircuitParams,
    d: &DisorderParams,
    k: usize,
    quality: GridQuality,
    opts: &SolverOptions,
    error_bound: Option<f64>,
) -> Result<EigenSolution> {
    let base = default_grid(p, quality);
    let refined = base.refined()?;
    solve_on_grids(p, d, PotentialModel::Full, k, &base, &refined, opts, error_bound)
}

/// Single-grid solve at `quality`.
pub fn solve(
    p: &CircuitParams,
    d: &DisorderParams,
    k: usize,
    quality: GridQuality,
    opts: &SolverOptions,
) -> Result<EigenSolution> {
    let g = default_grid(p, quality);
    lowest_eigenpairs(&assemble_model(p, d, &g, PotentialModel::Full)?, k, opts)
}
