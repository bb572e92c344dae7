//! Banded Cholesky factorization for the shift-invert step.
//!
//! With φ-major indexing every stencil entry lies within `N` of the diagonal
//! (`2N − 1` once the mixed-derivative stencil wraps around in θ), so the
//! factor of `H − σ` fits in `O(n·N)` doubles and costs `O(n·N²)` to build.

use crate::error::{Error, Result};
use crate::grid::SparseHamiltonian;

/// Lower Cholesky factor `L` of a symmetric positive definite band matrix,
/// stored row by row: row `i` holds columns `i − b ..= i`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Factors `H − shift·I`.
    pub fn factor(h: &SparseHamiltonian, shift: f64) -> Result<Self> {
        let n = h.dimension();
        let bw = h.half_bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for (i, j, v) in h.triplets() {
            if j <= i {
                data[i * w + (j + bw - i)] = v;
            }
        }
        for i in 0..n {
            data[i * w + bw] -= shift;
        }

        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                // L[i][k] and L[j][k] for k in max(j0, j − bw) .. j
                let k0 = j0.max(j.saturating_sub(bw));
                let len = j - k0;
                let (ri, rj) = (i * w + (k0 + bw - i), j * w + (k0 + bw - j));
                let s = {
                    let (a, b) = (&data[ri..ri + len], &data[rj..rj + len]);
                    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
                };
                let idx = i * w + (j + bw - i);
                let val = data[idx] - s;
                if j == i {
                    if !(val > 0.0) || !val.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, shift });
                    }
                    data[idx] = val.sqrt();
                } else {
                    data[idx] = val / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `(H − σ) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        debug_assert_eq!(x.len(), n);
        // L y = b
        for i in 0..n {
            let k0 = i.saturating_sub(bw);
            let row = &self.data[i * w + (k0 + bw - i)..i * w + bw];
            let s = row.iter().zip(&x[k0..i]).fold(0.0, |acc, (l, y)| acc + l * y);
            x[i] = (x[i] - s) / self.data[i * w + bw];
        }
        // Lᵀ z = y, sweeping rows of L as columns of Lᵀ
        for i in (0..n).rev() {
            x[i] /= self.data[i * w + bw];
            let zi = x[i];
            let k0 = i.saturating_sub(bw);
            let row = &self.data[i * w + (k0 + bw - i)..i * w + bw];
            for (xk, l) in x[k0..i].iter_mut().zip(row) {
                *xk -= l * zi;
            }
        }
    }
}
