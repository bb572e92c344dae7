//! Finite-difference discretization of the (φ, θ) plane and assembly of the
//! sparse Hamiltonian.
//!
//! φ is truncated to `[-φ_M, φ_M]` with the wavefunction taken to vanish
//! outside; θ is periodic with `N·Δθ = 2π`. Grid vectors are stored φ-major:
//! the point `(φ_m, θ_n)` lives at index `m·N + n`, with `m = 0` at `φ = −φ_M`
//! and `θ_n = n·Δθ`.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::circuit::{potential_disordered, potential_toy, CircuitParams, DisorderParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    phi_max: f64,
    n_phi: usize,
    n_theta: usize,
}

impl Grid2D {
    pub fn new(phi_max: f64, n_phi: usize, n_theta: usize) -> Result<Self> {
        if !(phi_max.is_finite() && phi_max > 0.0) {
            return Err(Error::InvalidGrid(format!("phi_max must be positive, got {phi_max}")));
        }
        if n_phi < 3 || n_phi.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n_phi must be odd and >= 3, got {n_phi}")));
        }
        if n_theta < 3 {
            return Err(Error::InvalidGrid(format!("n_theta must be >= 3, got {n_theta}")));
        }
        Ok(Self {
            phi_max,
            n_phi,
            n_theta,
        })
    }

    /// Smallest grid on `[-phi_max, phi_max]` whose φ spacing does not exceed
    /// `max_dphi`.
    pub fn with_max_spacing(phi_max: f64, max_dphi: f64, n_theta: usize) -> Result<Self> {
        let half = (phi_max / max_dphi * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(phi_max, 2 * half + 1, n_theta)
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn half_width(&self) -> usize {
        self.n_phi / 2
    }
    pub fn dphi(&self) -> f64 {
        self.phi_max / self.half_width() as f64
    }
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }
    pub fn dimension(&self) -> usize {
        self.n_phi * self.n_theta
    }
    pub fn cell_area(&self) -> f64 {
        self.dphi() * self.dtheta()
    }
    pub fn phi(&self, m: usize) -> f64 {
        (m as f64 - self.half_width() as f64) * self.dphi()
    }
    pub fn theta(&self, n: usize) -> f64 {
        n as f64 * self.dtheta()
    }
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n_theta + n
    }
    /// Inverse of [`Grid2D::index`].
    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i / self.n_theta, i % self.n_theta)
    }

    /// Grid with both spacings halved and φ_M enlarged by 25%.
    pub fn refined(&self) -> Result<Self> {
        Self::with_max_spacing(1.25 * self.phi_max, 0.5 * self.dphi(), 2 * self.n_theta)
    }

    /// Index permutation for φ → −φ.
    pub fn reflect_phi(&self, i: usize) -> usize {
        let (m, n) = self.coords(i);
        self.index(self.n_phi - 1 - m, n)
    }

    /// Index permutation for θ → −θ.
    pub fn reflect_theta(&self, i: usize) -> usize {
        let (m, n) = self.coords(i);
        self.index(m, (self.n_theta - n) % self.n_theta)
    }

    /// Index permutation for θ → θ + π; `None` when N is odd.
    pub fn shift_theta_by_pi(&self, i: usize) -> Option<usize> {
        if !self.n_theta.is_multiple_of(2) {
            return None;
        }
        let (m, n) = self.coords(i);
        Some(self.index(m, (n + self.n_theta / 2) % self.n_theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridQuality {
    Coarse,
    Standard,
    Fine,
}

impl GridQuality {
    pub fn max_dphi(self) -> f64 {
        match self {
            GridQuality::Coarse => 0.15,
            GridQuality::Standard => 0.10,
            GridQuality::Fine => 0.05,
        }
    }

    pub fn n_theta(self) -> usize {
        match self {
            GridQuality::Coarse => 60,
            GridQuality::Standard => 100,
            GridQuality::Fine => 200,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GridQuality::Coarse => "coarse",
            GridQuality::Standard => "standard",
            GridQuality::Fine => "fine",
        }
    }
}

impl std::str::FromStr for GridQuality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(GridQuality::Coarse),
            "standard" => Ok(GridQuality::Standard),
            "fine" => Ok(GridQuality::Fine),
            other => Err(Error::InvalidGrid(format!("unknown grid quality `{other}`"))),
        }
    }
}

/// Half-width covering the harmonic envelope of the ground state with margin.
pub fn envelope_phi_max(p: &CircuitParams) -> f64 {
    (3.5 * (8.0 * p.e_cj / p.e_l).powf(0.25)).max(6.0)
}

pub fn default_grid(p: &CircuitParams, quality: GridQuality) -> Grid2D {
    Grid2D::with_max_spacing(envelope_phi_max(p), quality.max_dphi(), quality.n_theta())
        .expect("quality table always yields a valid grid")
}

/// Which potential fills the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PotentialModel {
    /// Symmetric potential plus junction disorder, at χ = 0.
    #[default]
    Full,
    /// Separable double-well model; disorder is ignored.
    Toy,
}

/// Real symmetric sparse matrix in CSR form, tied to the grid it discretizes.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    grid: Grid2D,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    /// Builds from per-row sorted `(col, value)` lists.
    pub(crate) fn from_rows(grid: Grid2D, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            grid,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dimension()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v)
    }

    /// Largest `|i − j|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dimension());
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (c, v) in self.cols[r.clone()].iter().zip(&self.values[r]) {
                acc += v * x[*c];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dimension()];
        self.matvec(x, &mut y);
        y
    }

    /// Rayleigh quotient `xᵀHx / xᵀx`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let hx = self.apply(x);
        dot(x, &hx) / dot(x, x)
    }

    /// Dense row-major copy; only sensible for small grids.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let mut out = vec![vec![0.0; n]; n];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// Writes the matrix as `row col value` lines.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "% dimension {} nnz {}", self.dimension(), self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rejects disorder for which the kinetic operator loses positivity.
///
/// The discrete kinetic symbol is bounded below by the continuum quadratic
/// form `2E_CJ k² + 2E_CΣ q² − 4E_CΣ r k q`, which is positive definite iff
/// `E_CΣ r² < E_CJ`.
fn check_cross_term(p: &CircuitParams, d: &DisorderParams) -> Result<()> {
    let coupling = p.e_c_sigma * d.delta_c_j_rel * d.delta_c_j_rel;
    if coupling >= p.e_cj {
        return Err(Error::UnboundedOperator { coupling, e_cj: p.e_cj });
    }
    Ok(())
}

pub fn assemble(p: &CircuitParams, d: &DisorderParams, g: &Grid2D) -> Result<SparseHamiltonian> {
    assemble_model(p, d, g, PotentialModel::Full)
}

pub fn assemble_model(
    p: &CircuitParams,
    d: &DisorderParams,
    g: &Grid2D,
    model: PotentialModel,
) -> Result<SparseHamiltonian> {
    check_cross_term(p, d)?;
    let (np, nt) = (g.n_phi(), g.n_theta());
    let (dp, dt) = (g.dphi(), g.dtheta());
    let hop_phi = -2.0 * p.e_cj / (dp * dp);
    let hop_theta = -2.0 * p.e_c_sigma / (dt * dt);
    let kinetic_diag = -2.0 * hop_phi - 2.0 * hop_theta;
    let cross = match model {
        PotentialModel::Full => p.e_c_sigma * d.delta_c_j_rel / (dp * dt),
        PotentialModel::Toy => 0.0,
    };

    let mut rows = Vec::with_capacity(g.dimension());
    for m in 0..np {
        let phi = g.phi(m);
        for n in 0..nt {
            let theta = g.theta(n);
            let up = (n + 1) % nt;
            let down = (n + nt - 1) % nt;
            let v = match model {
                PotentialModel::Full => potential_disordered(p, d, phi, theta, 0.0),
                PotentialModel::Toy => potential_toy(p, phi, theta),
            };
            let mut row = Vec::with_capacity(9);
            if m > 0 {
                row.push((g.index(m - 1, n), hop_phi));
                if cross != 0.0 {
                    row.push((g.index(m - 1, up), -cross));
                    row.push((g.index(m - 1, down), cross));
                }
            }
            row.push((g.index(m, n), kinetic_diag + v));
            row.push((g.index(m, up), hop_theta));
            row.push((g.index(m, down), hop_theta));
            if m + 1 < np {
                row.push((g.index(m + 1, n), hop_phi));
                if cross != 0.0 {
                    row.push((g.index(m + 1, up), cross));
                    row.push((g.index(m + 1, down), -cross));
                }
            }
            row.sort_by_key(|&(c, _)| c);
            rows.push(row);
        }
    }
    Ok(SparseHamiltonian::from_rows(*g, rows))
}

/// Discrete L² inner product `Σ a·b·Δφ·Δθ`.
pub fn inner_product(a: &[f64], b: &[f64], g: &Grid2D) -> Result<f64> {
    for v in [a, b] {
        if v.len() != g.dimension() {
            return Err(Error::DimensionMismatch {
                expected: g.dimension(),
                got: v.len(),
            });
        }
    }
    Ok(dot(a, b) * g.cell_area())
}

/// Centered-difference `∂θ` with periodic wraparound, the same stencil the
/// cross term uses. Antisymmetric as a matrix.
pub fn d_theta(psi: &[f64], g: &Grid2D) -> Vec<f64> {
    let nt = g.n_theta();
    let h = 0.5 / g.dtheta();
    let mut out = vec![0.0; psi.len()];
    for (row_in, row_out) in psi.chunks_exact(nt).zip(out.chunks_exact_mut(nt)) {
        for n in 0..nt {
            row_out[n] = h * (row_in[(n + 1) % nt] - row_in[(n + nt - 1) % nt]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(p_ext: f64) -> (CircuitParams, Grid2D) {
        let p = CircuitParams::from_ratios(50.0, 40.0, 6.0, p_ext).unwrap();
        (p, Grid2D::new(4.0, 21, 16).unwrap())
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid2D::new(5.0, 10, 8).is_err());
        assert!(Grid2D::new(5.0, 1, 8).is_err());
        assert!(Grid2D::new(5.0, 11, 2).is_err());
        let g = Grid2D::new(5.0, 11, 8).unwrap();
        assert!((g.dtheta() * g.n_theta() as f64 - 2.0 * PI).abs() < 1e-15);
        assert_eq!(g.phi(5), 0.0);
        assert_eq!(g.phi(0), -5.0);
        assert_eq!(g.phi(10), 5.0);
        for i in 0..g.dimension() {
            let (m, n) = g.coords(i);
            assert_eq!(g.index(m, n), i);
        }
    }

    #[test]
    fn default_grid_examples() {
        let p = CircuitParams::from_ratios(1e4, 2.2e3, 7.9, 0.0).unwrap();
        let g = default_grid(&p, GridQuality::Standard);
        let expected = 3.5 * (8.0 * 0.9875 * 1e4f64).powf(0.25);
        assert!((g.phi_max() - expected).abs() < 1e-9);
        assert!((g.phi_max() - 58.7).abs() < 0.1);
        assert_eq!(g.n_phi(), 1175);
        assert_eq!(g.n_theta(), 100);
        assert!(g.dphi() <= 0.1);

        let flat = CircuitParams::from_energies(0.1, 10.0, 1.25, 0.05, None, 0.0).unwrap();
        assert_eq!(default_grid(&flat, GridQuality::Coarse).phi_max(), 6.0);

        let fine = default_grid(&p, GridQuality::Fine);
        assert!((fine.dphi() - 0.5 * g.dphi()).abs() < 1e-3 * g.dphi());
        assert_eq!(fine.n_theta(), 2 * g.n_theta());
    }

    #[test]
    fn refined_grid() {
        let g = Grid2D::new(10.0, 101, 40).unwrap();
        let r = g.refined().unwrap();
        assert!((r.phi_max() - 12.5).abs() < 1e-12);
        assert!(r.dphi() <= 0.5 * g.dphi() + 1e-15);
        assert_eq!(r.n_theta(), 80);
    }

    #[test]
    fn exact_symmetry() {
        let (p, g) = small(0.4);
        let d = DisorderParams::new(0.02, 0.3, 0.0, 0.0).unwrap();
        let h = assemble(&p, &d, &g).unwrap();
        for (i, j, v) in h.triplets() {
            assert_eq!(h.get(j, i).map(f64::to_bits), Some(v.to_bits()));
        }
    }

    #[test]
    fn zero_josephson_structure() {
        // E_J = 0: harmonic chain ⊗ 1 + 1 ⊗ periodic Laplacian + E_L φ².
        let p = CircuitParams::from_energies(0.0, 0.01, 1.0, 0.02, None, 0.0).unwrap();
        let g = Grid2D::new(3.0, 7, 6).unwrap();
        let h = assemble(&p, &DisorderParams::NONE, &g).unwrap();
        let (dp, dt) = (g.dphi(), g.dtheta());
        for i in 0..g.dimension() {
            let (m, n) = g.coords(i);
            for j in 0..g.dimension() {
                let (m2, n2) = g.coords(j);
                let mut want = 0.0;
                if n == n2 {
                    if m == m2 {
                        want += 4.0 * p.e_cj / (dp * dp) + p.e_l * g.phi(m).powi(2);
                    } else if m.abs_diff(m2) == 1 {
                        want -= 2.0 * p.e_cj / (dp * dp);
                    }
                }
                if m == m2 {
                    let dn = (n + 6 - n2) % 6;
                    if dn == 0 {
                        want += 4.0 * p.e_c_sigma / (dt * dt);
                    } else if dn == 1 || dn == 5 {
                        want -= 2.0 * p.e_c_sigma / (dt * dt);
                    }
                }
                let got = h.get(i, j).unwrap_or(0.0);
                assert!((got - want).abs() < 1e-12, "({i},{j}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn cross_term_footprint() {
        let (p, g) = small(0.0);
        let sym = assemble(&p, &DisorderParams::NONE, &g).unwrap();
        let d = DisorderParams::new(0.0, 0.5, 0.0, 0.0).unwrap();
        let dis = assemble(&p, &d, &g).unwrap();
        let interior = g.index(5, 7);
        assert_eq!(sym.row(interior).count(), 5);
        assert_eq!(dis.row(interior).count(), 9);
        let edge = g.index(0, 7);
        assert_eq!(dis.row(edge).count() - sym.row(edge).count(), 2);
    }

    #[test]
    fn commutes_with_phi_reflection() {
        let (p, g) = small(0.0);
        let h = assemble(&p, &DisorderParams::NONE, &g).unwrap();
        for (i, j, v) in h.triplets() {
            let w = h.get(g.reflect_phi(i), g.reflect_phi(j)).unwrap();
            assert!((v - w).abs() <= 1e-14 * v.abs().max(1.0));
        }
        for (i, j, v) in h.triplets() {
            let w = h.get(g.reflect_theta(i), g.reflect_theta(j)).unwrap();
            assert!((v - w).abs() <= 1e-14 * v.abs().max(1.0));
        }
    }

    #[test]
    fn inner_product_normalization() {
        let g = Grid2D::new(3.0, 61, 40).unwrap();
        let c = 1.0 / (2.0 * g.phi_max() * 2.0 * PI).sqrt();
        let v = vec![c; g.dimension()];
        let s = inner_product(&v, &v, &g).unwrap();
        // n_phi points cover 2φ_M + Δφ
        let want = (g.n_phi() as f64 * g.dphi()) / (2.0 * g.phi_max());
        assert!((s - want).abs() < 1e-12);
        assert!((s - 1.0).abs() < 2.0 * g.dphi());
        assert!(matches!(
            inner_product(&v, &v[1..], &g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kinetic_stencil_is_second_order() {
        // Gaussian(φ)·cos θ against the analytic −2E_CJ ψ″_φ − 2E_CΣ ψ″_θ.
        let p = CircuitParams::from_energies(0.0, 1e-9, 0.7, 0.2, None, 0.0).unwrap();
        let err = |n_half: usize, nt: usize| {
            let g = Grid2D::new(8.0, 2 * n_half + 1, nt).unwrap();
            let h = assemble(&p, &DisorderParams::NONE, &g).unwrap();
            let f = |phi: f64, th: f64| (-phi * phi / 2.0).exp() * th.cos();
            let psi: Vec<f64> = (0..g.dimension())
                .map(|i| {
                    let (m, n) = g.coords(i);
                    f(g.phi(m), g.theta(n))
                })
                .collect();
            let hpsi = h.apply(&psi);
            let mut worst: f64 = 0.0;
            for i in 0..g.dimension() {
                let (m, n) = g.coords(i);
                let (x, th) = (g.phi(m), g.theta(n));
                let gauss = (-x * x / 2.0).exp();
                let exact = -2.0 * p.e_cj * (x * x - 1.0) * gauss * th.cos()
                    + 2.0 * p.e_c_sigma * gauss * th.cos()
                    + p.e_l * x * x * f(x, th);
                worst = worst.max((hpsi[i] - exact).abs());
            }
            worst
        };
        let e1 = err(40, 32);
        let e2 = err(80, 64);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn d_theta_is_antisymmetric() {
        let g = Grid2D::new(2.0, 5, 7).unwrap();
        let n = g.dimension();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = d_theta(&e, &g);
            for i in 0..n {
                let mut ei = vec![0.0; n];
                ei[i] = 1.0;
                let row = d_theta(&ei, &g);
                assert_eq!(col[i], -row[j]);
            }
        }
    }

    #[test]
    fn rejects_unbounded_cross_term() {
        let (p, g) = small(0.0);
        let d = DisorderParams {
            delta_c_j_rel: (p.e_cj / p.e_c_sigma).sqrt() * 1.01,
            ..DisorderParams::NONE
        };
        assert!(matches!(assemble(&p, &d, &g), Err(Error::UnboundedOperator { .. })));
    }

    #[test]
    fn coordinate_dump() {
        let (p, _) = small(0.0);
        let h = assemble(&p, &DisorderParams::NONE, &Grid2D::new(1.0, 3, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        h.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + h.nnz());
    }
}
