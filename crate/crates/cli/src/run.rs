use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use zeropi::dispersive::{cj_disorder_check, coupling_elements, dispersive_shifts, junction_disorder_sweep};
use zeropi::spectrum::{dmax_grid, export_wavefunction, fit_ejstar, flux_sweep, write_spectrum_csv};
use zeropi::{circuit::derived_scales, degeneracy, EigenSolution, Grid2D, PointStatus, SweepResult, SweepSettings};

use crate::config::{DisorderKind, RunConfig, Task};
use crate::RunError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Points (or whole solves) that produced no result.
    pub hard_failures: usize,
    /// Written files, manifest last.
    pub files: Vec<PathBuf>,
}

struct Report {
    files: Vec<PathBuf>,
    grids: Vec<String>,
    results: Vec<String>,
    trust: Vec<String>,
    failures: usize,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(
    report: &mut Report,
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), RunError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    report.files.push(path);
    Ok(())
}

fn grid_line(g: &Grid2D) -> String {
    format!(
        "{} x {} points, phi_max = {:.6}, dphi = {:.6e}, dtheta = {:.6e}",
        g.n_phi(),
        g.n_theta(),
        g.phi_max(),
        g.dphi(),
        g.dtheta()
    )
}

fn axis_label(values: &[f64]) -> String {
    let v: Vec<String> = values.iter().map(|x| format!("{x:e}")).collect();
    v.join(", ")
}

fn record_sweep(report: &mut Report, dir: &Path, sweep: &SweepResult) -> Result<(), RunError> {
    write_file(report, dir, "sweep.csv", |w| sweep.write_csv(w))?;
    for p in &sweep.points {
        let at = axis_label(&p.axis);
        if let Some(g) = &p.grid {
            report.grids.push(format!("({at}): {}", grid_line(g)));
        }
        match p.status() {
            PointStatus::Ok => {}
            PointStatus::Untrusted => {
                let d = p.d_value().map_or(String::from("?"), |d| format!("{d:.4}"));
                report.trust.push(format!("untrusted D = {d} at ({at})"));
            }
            PointStatus::Failed => {
                report.failures += 1;
                let msg = p.error.as_deref().unwrap_or("no result");
                report.trust.push(format!("FAILED at ({at}): {msg}"));
            }
        }
        for n in &p.notes {
            report.trust.push(format!("note at ({at}): {n}"));
        }
    }
    report.results.push(format!(
        "points = {}, ok = {}, untrusted = {}, failed = {}",
        sweep.points.len(),
        sweep.points.iter().filter(|p| p.status() == PointStatus::Ok).count(),
        sweep.untrusted().count(),
        sweep.failures()
    ));
    Ok(())
}

fn record_solution(report: &mut Report, dir: &Path, sol: &EigenSolution, refine: bool) -> Result<(), RunError> {
    write_file(report, dir, "spectrum.csv", |w| write_spectrum_csv(sol, w))?;
    let which = if refine { "refined grid" } else { "grid" };
    report.grids.push(format!("{which}: {}", grid_line(&sol.grid)));
    if sol.k() >= 3 {
        match degeneracy(sol) {
            Ok(r) => {
                report.results.push(format!(
                    "D = {:.6}, splitting = {:.6e}, gap = {:.6e}, trusted = {}",
                    r.d_value, r.splitting, r.gap, r.trusted
                ));
                if !r.trusted {
                    report.trust.push(format!("untrusted D = {:.4}", r.d_value));
                }
            }
            Err(e) => report.trust.push(format!("D unavailable: {e}")),
        }
    }
    Ok(())
}

/// Executes `config`, writing outputs into `out_dir` (created if needed).
/// Per-point solver failures are recorded, not raised; only configuration
/// and I/O problems are errors.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let started = Instant::now();
    let mut report = Report {
        files: Vec::new(),
        grids: Vec::new(),
        results: Vec::new(),
        trust: Vec::new(),
        failures: 0,
    };
    pool.install(|| execute(config, out_dir, &mut report))?;
    let wall = started.elapsed().as_secs_f64();

    let mut m = String::new();
    let _ = writeln!(m, "program = zeropi {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "wall_time_s = {wall:.3}");
    let _ = writeln!(m, "hard_failures = {}", report.failures);
    let _ = writeln!(m, "\n[config]\n{}", config.describe());
    let _ = writeln!(m, "[grids]");
    let base = if config.refine {
        "quality grid refined once (spacings halved, phi_max x1.25)"
    } else {
        "quality grid"
    };
    let _ = writeln!(m, "base = {} ({base})", config.quality.as_str());
    for g in &report.grids {
        let _ = writeln!(m, "{g}");
    }
    let _ = writeln!(m, "\n[results]");
    for r in &report.results {
        let _ = writeln!(m, "{r}");
    }
    let _ = writeln!(m, "\n[trust]");
    if report.trust.is_empty() {
        let _ = writeln!(m, "all reported values trusted, no resonances");
    }
    for t in &report.trust {
        let _ = writeln!(m, "{t}");
    }
    let _ = writeln!(m, "\n[files]");
    for f in &report.files {
        let _ = writeln!(
            m,
            "{}",
            f.file_name()
                .map_or(String::new(), |n| n.to_string_lossy().into_owned())
        );
    }
    let mut files = report.files;
    let path = out_dir.join("manifest.txt");
    fs::write(&path, m).map_err(io_err(&path))?;
    files.push(path);
    Ok(RunOutcome {
        hard_failures: report.failures,
        files,
    })
}

fn execute(config: &RunConfig, dir: &Path, report: &mut Report) -> Result<(), RunError> {
    let settings = SweepSettings {
        quality: config.quality,
        solver: config.solver_options(),
        refine: config.refine,
    };
    let k = config.k;
    let d = &config.disorder;
    let circuit = config.circuit.as_ref();
    let swept = |r: zeropi::Result<SweepResult>, report: &mut Report| -> Result<(), RunError> {
        match r {
            Ok(s) => record_sweep(report, dir, &s),
            Err(e) => {
                report.failures += 1;
                report.trust.push(format!("FAILED: {e}"));
                Ok(())
            }
        }
    };

    match &config.task {
        Task::FluxSweep { flux } => swept(flux_sweep(circuit.expect("validated"), d, flux, k, &settings), report),
        Task::DisorderSweep { kind, values } => {
            let p = circuit.expect("validated");
            let r = match kind {
                DisorderKind::Junction => junction_disorder_sweep(p, d, values, k, &settings),
                DisorderKind::JunctionCapacitance => cj_disorder_check(p, d, values, k, &settings),
            };
            swept(r, report)
        }
        Task::EjOptimize { e_l, e_c_sigma } => {
            let r = dmax_grid(&[*e_l], &[*e_c_sigma], k, &settings);
            if let Ok(s) = &r {
                if let Some(p) = s.points.first() {
                    if let (Some(ej), Some(d)) = (p.e_j_star, p.d_value()) {
                        report.results.push(format!("E_J* = {ej:.6e}, D_max = {d:.6}"));
                    }
                }
            }
            swept(r, report)
        }
        Task::DmaxGrid { e_l, e_c_sigma } => {
            let r = dmax_grid(e_l, e_c_sigma, k, &settings);
            if let Ok(s) = &r {
                match fit_ejstar(s) {
                    Ok(f) => report.results.push(format!(
                        "E_J* fit over {} trusted points: intercept = {:.6}, slope = {:.6} (x = log10(E_CSigma/E_L))",
                        f.points, f.intercept, f.slope
                    )),
                    Err(e) => report.results.push(format!("E_J* fit not available: {e}")),
                }
            }
            swept(r, report)
        }
        Task::Spectrum | Task::Dispersive { .. } | Task::WavefunctionExport { .. } => {
            let p = circuit.expect("validated");
            let sol = match settings.solve(p, d, k) {
                Ok(s) => s,
                Err(e) => {
                    report.failures += 1;
                    report.trust.push(format!("FAILED: {e}"));
                    return Ok(());
                }
            };
            record_solution(report, dir, &sol, config.refine)?;
            match &config.task {
                Task::Dispersive { resonance_factor } => {
                    let shifts = coupling_elements(&sol, p, d).and_then(|g| {
                        dispersive_shifts(&sol.energies, &g, derived_scales(p).omega_chi, *resonance_factor)
                    });
                    match shifts {
                        Ok(r) => {
                            write_file(report, dir, "couplings.csv", |w| r.write_couplings_csv(w))?;
                            write_file(report, dir, "shifts.csv", |w| r.write_shifts_csv(w))?;
                            report.results.push(format!("omega_chi = {:.6e}", r.omega_chi));
                            for &(l, lp) in &r.resonances {
                                report.trust.push(format!(
                                    "resonance: |Delta({l},{lp})| = {:.3e} below threshold; pair excluded, perturbative treatment may break down",
                                    r.detuning(l, lp).abs()
                                ));
                            }
                        }
                        Err(e) => {
                            report.failures += 1;
                            report.trust.push(format!("FAILED: {e}"));
                        }
                    }
                }
                Task::WavefunctionExport { levels } => {
                    for &l in levels {
                        match export_wavefunction(&sol, l) {
                            Ok(t) => write_file(report, dir, &format!("wavefunction_{l}.csv"), |w| t.write_csv(w))?,
                            Err(e) => {
                                report.failures += 1;
                                report.trust.push(format!("FAILED: {e}"));
                            }
                        }
                    }
                }
                _ => {}
            }
            Ok(())
        }
    }
}
