//! Degeneracy measure, sweeps over flux and circuit energies, the `E_J`
//! optimization and wavefunction export.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::circuit::{CircuitParams, DisorderParams};
use crate::eigen::{lowest_eigenpairs, solve_on_grids, EigenSolution, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::grid::{assemble, default_grid, Grid2D, GridQuality, PotentialModel};

/// A splitting counts as resolved when its two-grid error is below this
/// fraction of the splitting itself.
pub const TRUST_FRACTION: f64 = 0.1;

/// Log-scan bounds for `E_J/ħω_p` and the number of scan points.
pub const EJ_SCAN_LOG10: (f64, f64) = (-1.5, 0.0);
pub const EJ_SCAN_POINTS: usize = 25;
/// Golden-section refinement stops once the bracket is this narrow in `E_J`.
pub const EJ_REL_TOL: f64 = 0.01;
/// A scan whose D varies by less than this is treated as flat.
pub const FLAT_D_RESOLUTION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyReport {
    pub d_value: f64,
    /// `E₁ − E₀`
    pub splitting: f64,
    /// `E₂ − E₀`
    pub gap: f64,
    pub trusted: bool,
}

impl DegeneracyReport {
    /// `splitting_error` is the discretization error of `E₁ − E₀`; without
    /// one the value is never trusted.
    pub fn from_energies(e: &[f64], splitting_error: Option<f64>) -> Result<Self> {
        if e.len() < 3 {
            return Err(Error::TooFewLevels {
                needed: 3,
                have: e.len(),
            });
        }
        let splitting = e[1] - e[0];
        let gap = e[2] - e[0];
        if !(splitting > 0.0) {
            return Err(Error::OrderingViolation(splitting));
        }
        let trusted = splitting_error.is_some_and(|err| err < TRUST_FRACTION * splitting);
        Ok(Self {
            d_value: (gap / splitting).log10(),
            splitting,
            gap,
            trusted,
        })
    }
}

pub fn degeneracy(e: &EigenSolution) -> Result<DegeneracyReport> {
    let err = if e.k() >= 2 { e.gap_disc_error(0, 1) } else { None };
    DegeneracyReport::from_energies(&e.energies, err)
}

/// How a sweep point is solved.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub quality: GridQuality,
    pub solver: SolverOptions,
    /// Solve on the quality grid and its refinement; needed for a trusted D.
    pub refine: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            quality: GridQuality::Standard,
            solver: SolverOptions::default(),
            refine: true,
        }
    }
}

impl SweepSettings {
    pub fn solve(&self, p: &CircuitParams, d: &DisorderParams, k: usize) -> Result<EigenSolution> {
        let base = default_grid(p, self.quality);
        if self.refine {
            let fine = base.refined()?;
            solve_on_grids(p, d, PotentialModel::Full, k, &base, &fine, &self.solver, None)
        } else {
            lowest_eigenpairs(&assemble(p, d, &base)?, k, &self.solver)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    Untrusted,
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Untrusted => "untrusted",
            PointStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Coordinates along the sweep axes.
    pub axis: Vec<f64>,
    pub energies: Vec<f64>,
    pub report: Option<DegeneracyReport>,
    pub e_j_star: Option<f64>,
    pub grid: Option<Grid2D>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

impl SweepPoint {
    fn failed(axis: Vec<f64>, e: &Error) -> Self {
        Self {
            axis,
            energies: Vec::new(),
            report: None,
            e_j_star: None,
            grid: None,
            error: Some(e.to_string()),
            notes: Vec::new(),
        }
    }

    pub(crate) fn from_solution(axis: Vec<f64>, sol: Result<EigenSolution>) -> Self {
        let sol = match sol {
            Ok(s) => s,
            Err(e) => return Self::failed(axis, &e),
        };
        let (report, error) = match degeneracy(&sol) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            axis,
            energies: sol.energies,
            report,
            e_j_star: None,
            grid: Some(sol.grid),
            error,
            notes: Vec::new(),
        }
    }

    pub fn status(&self) -> PointStatus {
        match (&self.error, &self.report) {
            (None, Some(r)) if r.trusted => PointStatus::Ok,
            (None, Some(_)) => PointStatus::Untrusted,
            _ => PointStatus::Failed,
        }
    }

    pub fn d_value(&self) -> Option<f64> {
        self.report.map(|r| r.d_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Column labels with units, one per axis coordinate.
    pub axis_names: Vec<String>,
    pub k: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.status() == PointStatus::Failed).count()
    }

    pub fn untrusted(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.status() == PointStatus::Untrusted)
    }

    /// One row per point; failed points keep their axis values and status.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header: Vec<String> = self.axis_names.clone();
        header.push("status".into());
        header.extend((0..self.k).map(|i| format!("E{i}[hbar_omega_p]")));
        header.extend(
            [
                "splitting[hbar_omega_p]",
                "gap[hbar_omega_p]",
                "D[log10]",
                "trusted",
                "E_J_star[hbar_omega_p]",
                "message",
            ]
            .map(String::from),
        );
        writeln!(w, "{}", header.join(","))?;
        for p in &self.points {
            let mut row: Vec<String> = p.axis.iter().map(|&x| num(x)).collect();
            row.push(p.status().as_str().into());
            row.extend((0..self.k).map(|i| p.energies.get(i).map_or(String::new(), |&e| num(e))));
            match p.report {
                Some(r) => row.extend([num(r.splitting), num(r.gap), num(r.d_value), r.trusted.to_string()]),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row.push(p.e_j_star.map_or(String::new(), num));
            let mut msg: Vec<&str> = p.error.iter().map(String::as_str).collect();
            msg.extend(p.notes.iter().map(String::as_str));
            row.push(csv_text(&msg.join("; ")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn require_levels(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::TooFewLevels { needed: 3, have: k });
    }
    Ok(())
}

/// Lowest `k` levels and D at each external flux.
pub fn flux_sweep(
    p: &CircuitParams,
    d: &DisorderParams,
    flux_values: &[f64],
    k: usize,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    require_levels(k)?;
    if let Some(f) = flux_values.iter().find(|f| !f.is_finite()) {
        return Err(invalid("flux_values", format!("non-finite flux {f}")));
    }
    let points = flux_values
        .par_iter()
        .map(|&f| SweepPoint::from_solution(vec![f], settings.solve(&p.with_phi_ext(f), d, k)))
        .collect();
    Ok(SweepResult {
        axis_names: vec!["phi_ext[rad]".into()],
        k,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EjOptimum {
    pub e_j_star: f64,
    pub d_max: f64,
    /// Report from the final solve at `e_j_star`.
    pub report: DegeneracyReport,
    pub energies: Vec<f64>,
    pub grid: Grid2D,
    /// The scan did not resolve a maximum; `e_j_star` is the best scan point.
    pub flat: bool,
    pub evaluations: usize,
}

/// Maximizes D over `E_J` at fixed `E_L`, `E_CΣ` and plasma frequency
/// (`E_CJ = 1/(8E_J)`), at zero flux. Each trial solves on its own default
/// grid at `settings.quality`; only the final point uses the two-grid solve.
pub fn optimize_ej(e_l: f64, e_c_sigma: f64, k: usize, settings: &SweepSettings) -> Result<EjOptimum> {
    require_levels(k)?;
    for (name, v) in [("e_l", e_l), ("e_c_sigma", e_c_sigma)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    let (lo, hi) = EJ_SCAN_LOG10;
    let template = CircuitParams::from_ratios(1.0 / e_l, 1.0 / e_c_sigma, 10f64.powf(-0.5 * (lo + hi)), 0.0)?;
    let scan_opts = SweepSettings {
        refine: false,
        ..settings.clone()
    };
    let eval = |x: f64| -> Option<f64> {
        let p = template.with_plasma_slaved_e_j(10f64.powf(x)).ok()?;
        let sol = scan_opts.solve(&p, &DisorderParams::NONE, k).ok()?;
        degeneracy(&sol).ok().map(|r| r.d_value)
    };

    let xs: Vec<f64> = (0..EJ_SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (EJ_SCAN_POINTS - 1) as f64)
        .collect();
    let scan: Vec<Option<f64>> = xs.par_iter().map(|&x| eval(x)).collect();
    let mut evaluations = xs.len();
    let ok: Vec<(usize, f64)> = scan.iter().enumerate().filter_map(|(i, d)| d.map(|d| (i, d))).collect();
    if ok.is_empty() {
        return Err(Error::AllPointsFailed(xs.len()));
    }
    let (best_i, best_d) = ok
        .iter()
        .copied()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let min_d = ok.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let flat = best_d - min_d < FLAT_D_RESOLUTION;

    let mut best = (xs[best_i], best_d);
    if !flat {
        let mut a = xs[best_i.saturating_sub(1)];
        let mut b = xs[(best_i + 1).min(xs.len() - 1)];
        let f = |x: f64| eval(x).unwrap_or(f64::NEG_INFINITY);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut e = a + r * (b - a);
        let (mut fc, mut fe) = (f(c), f(e));
        evaluations += 2;
        let stop = (1.0 + EJ_REL_TOL).log10();
        while b - a > stop {
            if fc >= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + r * (b - a);
                fe = f(e);
            }
            evaluations += 1;
        }
        for (x, d) in [(c, fc), (e, fe)] {
            if d > best.1 {
                best = (x, d);
            }
        }
    }

    let e_j_star = 10f64.powf(best.0);
    let p = template.with_plasma_slaved_e_j(e_j_star)?;
    let sol = settings.solve(&p, &DisorderParams::NONE, k)?;
    let report = degeneracy(&sol)?;
    Ok(EjOptimum {
        e_j_star,
        d_max: report.d_value,
        report,
        energies: sol.energies,
        grid: sol.grid,
        flat,
        evaluations: evaluations + 1,
    })
}

/// `optimize_ej` over the product of the two value lists, `E_L`-major.
pub fn dmax_grid(
    e_l_values: &[f64],
    e_c_sigma_values: &[f64],
    k: usize,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    require_levels(k)?;
    let pairs: Vec<(f64, f64)> = e_l_values
        .iter()
        .flat_map(|&l| e_c_sigma_values.iter().map(move |&c| (l, c)))
        .collect();
    let points = pairs
        .par_iter()
        .map(|&(l, c)| match optimize_ej(l, c, k, settings) {
            Ok(o) => SweepPoint {
                axis: vec![l, c],
                energies: o.energies,
                report: Some(o.report),
                e_j_star: Some(o.e_j_star),
                grid: Some(o.grid),
                error: None,
                notes: if o.flat {
                    vec!["flat D landscape".into()]
                } else {
                    Vec::new()
                },
            },
            Err(e) => SweepPoint::failed(vec![l, c], &e),
        })
        .collect();
    Ok(SweepResult {
        axis_names: vec!["E_L[hbar_omega_p]".into(), "E_CSigma[hbar_omega_p]".into()],
        k,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let spread = xs.iter().map(|x| (x - mx).abs()).fold(0.0, f64::max);
    if xs.len() < 2 || spread <= 1e-12 * (1.0 + mx.abs()) {
        return Err(Error::RankDeficient("need at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        intercept: my - slope * mx,
        slope,
        points: xs.len(),
    })
}

pub const MIN_FIT_POINTS: usize = 6;

/// Fits `E_J*` against `log₁₀(E_CΣ/E_L)` over the trusted points of a
/// `dmax_grid` table.
pub fn fit_ejstar(table: &SweepResult) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .points
        .iter()
        .filter(|p| p.status() == PointStatus::Ok && p.axis.len() == 2)
        .filter_map(|p| p.e_j_star.map(|ej| ((p.axis[1] / p.axis[0]).log10(), ej)))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(invalid(
            "table",
            format!("need {MIN_FIT_POINTS} trusted points, have {}", xs.len()),
        ));
    }
    fit_line(&xs, &ys)
}

/// A single level on the grid, sign-fixed and L²-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionTable {
    pub grid: Grid2D,
    pub level: usize,
    pub energy: f64,
    /// φ-major, like the grid vectors.
    pub amplitudes: Vec<f64>,
}

impl WavefunctionTable {
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.amplitudes.iter().enumerate().map(|(i, &a)| {
            let (m, n) = self.grid.coords(i);
            (self.grid.phi(m), self.grid.theta(n), a)
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "phi[rad],theta[rad],psi[rad^-1]")?;
        for (phi, theta, a) in self.rows() {
            writeln!(w, "{},{},{}", num(phi), num(theta), num(a))?;
        }
        Ok(())
    }
}

/// Level `level` of `e`, with the sign chosen so the entry of largest
/// magnitude is positive.
pub fn export_wavefunction(e: &EigenSolution, level: usize) -> Result<WavefunctionTable> {
    let psi = e
        .wavefunctions
        .get(level)
        .ok_or(Error::LevelOutOfRange { level, k: e.k() })?;
    let peak = psi
        .iter()
        .copied()
        .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
    Ok(WavefunctionTable {
        grid: e.grid,
        level,
        energy: e.energies[level],
        amplitudes: psi.iter().map(|x| sign * x).collect(),
    })
}

/// Probability mass in the windows `|θ| < π/4` and `|θ − π| < π/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeMasses {
    pub zero: f64,
    pub pi: f64,
    pub total: f64,
}

impl RidgeMasses {
    /// Share of the ridge mass on the θ = 0 ridge.
    pub fn split(&self) -> f64 {
        self.zero / (self.zero + self.pi)
    }

    /// Fraction of all probability sitting on the more populated ridge.
    pub fn dominant_fraction(&self) -> f64 {
        self.zero.max(self.pi) / self.total
    }
}

pub fn ridge_masses(psi: &[f64], g: &Grid2D) -> Result<RidgeMasses> {
    if psi.len() != g.dimension() {
        return Err(Error::DimensionMismatch {
            expected: g.dimension(),
            got: psi.len(),
        });
    }
    let nt = g.n_theta();
    let window: Vec<u8> = (0..nt)
        .map(|n| {
            let t = g.theta(n);
            let from_zero = t.min(2.0 * PI - t);
            if from_zero < PI / 4.0 {
                1
            } else if (t - PI).abs() < PI / 4.0 {
                2
            } else {
                0
            }
        })
        .collect();
    let mut m = [0.0; 3];
    for row in psi.chunks_exact(nt) {
        for (x, &w) in row.iter().zip(&window) {
            m[w as usize] += x * x;
        }
    }
    let area = g.cell_area();
    Ok(RidgeMasses {
        zero: m[1] * area,
        pi: m[2] * area,
        total: (m[0] + m[1] + m[2]) * area,
    })
}

/// Per-level rows `level, E, residual, disc_error`.
pub fn write_spectrum_csv<W: Write>(e: &EigenSolution, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "level,E[hbar_omega_p],residual[hbar_omega_p],disc_error[hbar_omega_p]"
    )?;
    for i in 0..e.k() {
        let de = e.disc_error.as_ref().map_or(String::new(), |d| num(d[i]));
        writeln!(w, "{i},{},{},{de}", num(e.energies[i]), num(e.residual_norms[i]))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn d_from_energies() {
        let r = DegeneracyReport::from_energies(&[0.0, 0.001, 1.0], None).unwrap();
        assert!((r.d_value - 3.0).abs() < 1e-12);
        assert!(!r.trusted);
        assert!(matches!(
            DegeneracyReport::from_energies(&[1.0, 1.0, 2.0], None),
            Err(Error::OrderingViolation(_))
        ));
        assert!(matches!(
            DegeneracyReport::from_energies(&[1.0, 2.0], None),
            Err(Error::TooFewLevels { .. })
        ));
    }

    #[test]
    fn trust_rule() {
        let e = [0.0, 1e-3, 1.0];
        assert!(DegeneracyReport::from_energies(&e, Some(0.99e-4)).unwrap().trusted);
        assert!(!DegeneracyReport::from_energies(&e, Some(1.01e-4)).unwrap().trusted);
    }

    proptest! {
        #[test]
        fn d_shift_invariant(e0 in -5.0..5.0f64, s in 1e-6..1.0f64, g in 1.0..100.0f64, c in -3.0..3.0f64) {
            let e = [e0, e0 + s, e0 + s * g];
            let shifted = e.map(|x| x + c);
            let a = DegeneracyReport::from_energies(&e, None).unwrap();
            let b = DegeneracyReport::from_energies(&shifted, None).unwrap();
            prop_assert!((a.d_value - b.d_value).abs() < 1e-6);
            prop_assert!(a.d_value > 0.0);
            prop_assert!((a.d_value - (a.gap / a.splitting).log10()).abs() == 0.0);
        }

        #[test]
        fn exact_line_recovered(a in -1.0..1.0f64, b in -1.0..1.0f64, xs in prop::collection::vec(-3.0..3.0f64, 2..12)) {
            prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3));
            let ys: Vec<f64> = xs.iter().map(|x| a + b * x).collect();
            let fit = fit_line(&xs, &ys).unwrap();
            prop_assert!((fit.intercept - a).abs() < 1e-9 && (fit.slope - b).abs() < 1e-9);
        }
    }

    fn table(rows: &[(f64, f64, f64)]) -> SweepResult {
        SweepResult {
            axis_names: vec!["E_L".into(), "E_CSigma".into()],
            k: 3,
            points: rows
                .iter()
                .map(|&(l, c, ej)| SweepPoint {
                    axis: vec![l, c],
                    energies: vec![0.0, 1e-3, 1.0],
                    report: Some(DegeneracyReport::from_energies(&[0.0, 1e-3, 1.0], Some(0.0)).unwrap()),
                    e_j_star: Some(ej),
                    grid: None,
                    error: None,
                    notes: Vec::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn fit_through_two_ratios() {
        // ratios 1 and 10: x = 0 and 1
        let t = table(&[
            (1e-3, 1e-3, 0.2),
            (1e-4, 1e-4, 0.2),
            (1e-2, 1e-2, 0.2),
            (1e-3, 1e-2, 0.1),
            (1e-4, 1e-3, 0.1),
            (1e-5, 1e-4, 0.1),
        ]);
        let fit = fit_ejstar(&t).unwrap();
        assert!((fit.intercept - 0.2).abs() < 1e-12);
        assert!((fit.slope + 0.1).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_single_ratio_and_small_tables() {
        let same: Vec<_> = (0..6).map(|i| (10f64.powi(-i), 10f64.powi(-i), 0.2)).collect();
        assert!(matches!(fit_ejstar(&table(&same)), Err(Error::RankDeficient(_))));
        assert!(fit_ejstar(&table(&same[..5])).is_err());
    }

    #[test]
    fn failed_rows_are_kept() {
        let mut t = table(&[(1.0, 2.0, 0.1)]);
        t.points
            .push(SweepPoint::failed(vec![3.0, 4.0], &Error::AllPointsFailed(25)));
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("E_L,E_CSigma,status,E0[hbar_omega_p]"));
        assert!(lines[2].contains(",failed,"));
        assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
        assert_eq!(t.failures(), 1);
    }

    #[test]
    fn wavefunction_sign_and_range() {
        let g = Grid2D::new(2.0, 3, 4).unwrap();
        let mut psi = vec![0.1; 12];
        psi[5] = -0.9;
        let sol = EigenSolution {
            energies: vec![0.5],
            wavefunctions: vec![psi],
            residual_norms: vec![0.0],
            disc_error: None,
            coarse_energies: None,
            flagged: Vec::new(),
            grid: g,
        };
        let t = export_wavefunction(&sol, 0).unwrap();
        assert_eq!(t.amplitudes[5], 0.9);
        assert_eq!(t.amplitudes[0], -0.1);
        assert!(matches!(
            export_wavefunction(&sol, 1),
            Err(Error::LevelOutOfRange { level: 1, k: 1 })
        ));
        let rows: Vec<_> = t.rows().collect();
        assert_eq!(rows[5], (g.phi(1), g.theta(1), 0.9));
    }

    #[test]
    fn ridge_windows() {
        let g = Grid2D::new(2.0, 3, 8).unwrap();
        // θ_n = nπ/4: n = 0 is on the zero ridge, n = 4 on the π ridge;
        // n = 1 sits exactly on the window edge and counts for neither.
        let mut psi = vec![0.0; g.dimension()];
        psi[g.index(1, 0)] = 1.0;
        psi[g.index(1, 4)] = 2.0;
        psi[g.index(1, 1)] = 1.0;
        let m = ridge_masses(&psi, &g).unwrap();
        let a = g.cell_area();
        assert!((m.zero - a).abs() < 1e-15 && (m.pi - 4.0 * a).abs() < 1e-15);
        assert!((m.total - 6.0 * a).abs() < 1e-15);
        assert!((m.split() - 0.2).abs() < 1e-12);
    }
}
