//! Run configuration: TOML text with a few top-level keys and one table per
//! concern. Unknown keys are rejected so typos cannot go unnoticed.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Deserialize;
use zeropi::{CircuitParams, DisorderParams, GridQuality};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    FluxSweep,
    DmaxGrid,
    EjOptimize,
    DisorderSweep,
    Dispersive,
    WavefunctionExport,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::FluxSweep => "flux-sweep",
            Mode::DmaxGrid => "dmax-grid",
            Mode::EjOptimize => "ej-optimize",
            Mode::DisorderSweep => "disorder-sweep",
            Mode::Dispersive => "dispersive",
            Mode::WavefunctionExport => "wavefunction-export",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    k: Option<usize>,
    quality: Option<String>,
    tol: Option<f64>,
    refine: Option<bool>,
    max_restarts: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    circuit: Option<RawCircuit>,
    disorder: Option<RawDisorder>,
    flux: Option<RawAxis>,
    dmax: Option<RawDmax>,
    disorder_sweep: Option<RawDisorderSweep>,
    dispersive: Option<RawDispersive>,
    wavefunction: Option<RawWavefunction>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    omega_over_e_l: Option<f64>,
    omega_over_e_c_sigma: Option<f64>,
    omega_over_e_j: Option<f64>,
    e_j: Option<f64>,
    e_l: Option<f64>,
    e_cj: Option<f64>,
    e_c_sigma: Option<f64>,
    e_c: Option<f64>,
    phi_ext: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisorder {
    #[serde(default)]
    delta_e_j: f64,
    #[serde(default)]
    delta_c_j_rel: f64,
    #[serde(default)]
    delta_c_rel: f64,
    #[serde(default)]
    delta_e_l: f64,
}

/// Either an explicit list or `start`/`stop`/`count`, evenly spaced
/// (geometrically with `log = true`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    #[serde(default)]
    log: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDmax {
    omega_over_e_l: RawAxis,
    omega_over_e_c_sigma: RawAxis,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisorderSweep {
    kind: DisorderKind,
    values: RawAxis,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDispersive {
    resonance_factor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWavefunction {
    levels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderKind {
    /// `δE_J/E_J`
    Junction,
    /// `δC_J/C_J`
    JunctionCapacitance,
}

impl DisorderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DisorderKind::Junction => "junction",
            DisorderKind::JunctionCapacitance => "junction-capacitance",
        }
    }
}

/// Mode-specific inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Spectrum,
    FluxSweep {
        flux: Vec<f64>,
    },
    /// Energies in units of ħω_p.
    DmaxGrid {
        e_l: Vec<f64>,
        e_c_sigma: Vec<f64>,
    },
    EjOptimize {
        e_l: f64,
        e_c_sigma: f64,
    },
    DisorderSweep {
        kind: DisorderKind,
        values: Vec<f64>,
    },
    Dispersive {
        resonance_factor: f64,
    },
    WavefunctionExport {
        levels: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Absent for the modes that choose `E_J` themselves.
    pub circuit: Option<CircuitParams>,
    pub disorder: DisorderParams,
    pub quality: GridQuality,
    pub k: usize,
    pub tol: f64,
    pub refine: bool,
    pub max_restarts: usize,
    pub seed: u64,
    pub workers: usize,
    pub task: Task,
}

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_SEED: u64 = 0x0e1d_5eed;

fn field(name: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: name.to_string(),
        reason: reason.into(),
    }
}

fn axis(name: &str, raw: &RawAxis) -> Result<Vec<f64>, ConfigError> {
    let values = match (&raw.values, raw.start, raw.stop, raw.count) {
        (Some(v), None, None, None) if !raw.log => v.clone(),
        (None, Some(a), Some(b), Some(n)) => {
            if n == 0 {
                return Err(field(name, "count must be at least 1"));
            }
            if raw.log && !(a > 0.0 && b > 0.0) {
                return Err(field(name, "log ranges need positive start and stop"));
            }
            let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (0..n)
                .map(|i| {
                    if raw.log {
                        10f64.powf(a.log10() + (b.log10() - a.log10()) * t(i))
                    } else {
                        a + (b - a) * t(i)
                    }
                })
                .collect()
        }
        _ => {
            return Err(field(
                name,
                "give either `values = [...]` or `start`, `stop` and `count` (optionally `log = true`)",
            ))
        }
    };
    if values.is_empty() {
        return Err(field(name, "axis has no points"));
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(field(name, format!("non-finite value {x}")));
    }
    Ok(values)
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field(name, format!("must be positive, got {v}")))
    }
}

/// `(E_L, E_CΣ)` in units of ħω_p from either style.
fn inductive_and_sum(c: &RawCircuit) -> Result<(f64, f64), ConfigError> {
    let e_l = match (c.omega_over_e_l, c.e_l) {
        (Some(r), None) => 1.0 / positive("circuit.omega_over_e_l", r)?,
        (None, Some(e)) => positive("circuit.e_l", e)?,
        _ => return Err(field("circuit", "give exactly one of omega_over_e_l and e_l")),
    };
    let e_cs = match (c.omega_over_e_c_sigma, c.e_c_sigma) {
        (Some(r), None) => 1.0 / positive("circuit.omega_over_e_c_sigma", r)?,
        (None, Some(e)) => positive("circuit.e_c_sigma", e)?,
        _ => {
            return Err(field(
                "circuit",
                "give exactly one of omega_over_e_c_sigma and e_c_sigma",
            ))
        }
    };
    Ok((e_l, e_cs))
}

fn full_circuit(c: &RawCircuit) -> Result<CircuitParams, ConfigError> {
    let phi_ext = c.phi_ext.unwrap_or(0.0);
    let ratio_style = c.omega_over_e_l.is_some() || c.omega_over_e_c_sigma.is_some() || c.omega_over_e_j.is_some();
    let energy_style =
        c.e_j.is_some() || c.e_l.is_some() || c.e_cj.is_some() || c.e_c_sigma.is_some() || c.e_c.is_some();
    let params = match (ratio_style, energy_style) {
        (true, false) => {
            let get = |name: &str, v: Option<f64>| v.ok_or_else(|| field(&format!("circuit.{name}"), "missing"));
            CircuitParams::from_ratios(
                get("omega_over_e_l", c.omega_over_e_l)?,
                get("omega_over_e_c_sigma", c.omega_over_e_c_sigma)?,
                get("omega_over_e_j", c.omega_over_e_j)?,
                phi_ext,
            )
        }
        (false, true) => {
            let get = |name: &str, v: Option<f64>| v.ok_or_else(|| field(&format!("circuit.{name}"), "missing"));
            CircuitParams::from_energies(
                get("e_j", c.e_j)?,
                get("e_l", c.e_l)?,
                get("e_cj", c.e_cj)?,
                get("e_c_sigma", c.e_c_sigma)?,
                c.e_c,
                phi_ext,
            )
        }
        (true, true) => return Err(field("circuit", "mixes omega_over_* ratios with raw energies")),
        (false, false) => return Err(field("circuit", "no circuit energies given")),
    };
    params.map_err(|e| field("circuit", e.to_string()))
}

fn unused<T>(mode: Mode, name: &str, v: &Option<T>) -> Result<(), ConfigError> {
    if v.is_some() {
        return Err(field(name, format!("not used in mode {mode}")));
    }
    Ok(())
}

/// Parses and validates a configuration. `mode` comes from the command line
/// and must agree with a `mode` key in the text, if there is one.
pub fn parse_config(text: &str, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mode = match (raw.mode, mode) {
        (Some(a), Some(b)) if a != b => return Err(field("mode", format!("config says {a} but {b} was requested"))),
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(field("mode", "missing")),
    };

    let quality = match &raw.quality {
        Some(q) => GridQuality::from_str(q).map_err(|e| field("quality", e.to_string()))?,
        None => GridQuality::Standard,
    };
    let tol = positive("tol", raw.tol.unwrap_or(zeropi::eigen::DEFAULT_TOL))?;
    let k = raw.k.unwrap_or(DEFAULT_K);
    let sweep = matches!(
        mode,
        Mode::FluxSweep | Mode::DmaxGrid | Mode::EjOptimize | Mode::DisorderSweep
    );
    if k < 3 && sweep {
        return Err(field("k", format!("need k >= 3 for the degeneracy measure, got {k}")));
    }
    if k == 0 {
        return Err(field("k", "must be at least 1"));
    }
    let workers = raw.workers.unwrap_or(1);
    if workers == 0 {
        return Err(field("workers", "must be at least 1"));
    }
    let disorder = match &raw.disorder {
        Some(d) => DisorderParams::new(d.delta_e_j, d.delta_c_j_rel, d.delta_c_rel, d.delta_e_l)
            .map_err(|e| field("disorder", e.to_string()))?,
        None => DisorderParams::NONE,
    };
    let circuit_raw = raw.circuit.as_ref().ok_or_else(|| field("circuit", "missing"))?;

    let mut circuit = None;
    let task = match mode {
        Mode::DmaxGrid => {
            let d = raw.dmax.as_ref().ok_or_else(|| field("dmax", "missing"))?;
            let inv = |name: &str, a: &RawAxis| -> Result<Vec<f64>, ConfigError> {
                axis(name, a)?
                    .into_iter()
                    .map(|r| positive(name, r).map(|r| 1.0 / r))
                    .collect()
            };
            let has_energy = [
                circuit_raw.e_l,
                circuit_raw.e_c_sigma,
                circuit_raw.omega_over_e_l,
                circuit_raw.omega_over_e_c_sigma,
            ];
            if has_energy.iter().any(Option::is_some) || circuit_raw.phi_ext.is_some() {
                return Err(field(
                    "circuit",
                    "dmax-grid takes E_L and E_CSigma from [dmax] and runs at zero flux",
                ));
            }
            Task::DmaxGrid {
                e_l: inv("dmax.omega_over_e_l", &d.omega_over_e_l)?,
                e_c_sigma: inv("dmax.omega_over_e_c_sigma", &d.omega_over_e_c_sigma)?,
            }
        }
        Mode::EjOptimize => {
            let (e_l, e_c_sigma) = inductive_and_sum(circuit_raw)?;
            for (name, v) in [
                ("circuit.omega_over_e_j", circuit_raw.omega_over_e_j),
                ("circuit.e_j", circuit_raw.e_j),
                ("circuit.e_cj", circuit_raw.e_cj),
                ("circuit.e_c", circuit_raw.e_c),
                ("circuit.phi_ext", circuit_raw.phi_ext),
            ] {
                unused(mode, name, &v)?;
            }
            Task::EjOptimize { e_l, e_c_sigma }
        }
        _ => {
            circuit = Some(full_circuit(circuit_raw)?);
            match mode {
                Mode::Spectrum => Task::Spectrum,
                Mode::FluxSweep => Task::FluxSweep {
                    flux: axis("flux", raw.flux.as_ref().ok_or_else(|| field("flux", "missing"))?)?,
                },
                Mode::DisorderSweep => {
                    let s = raw
                        .disorder_sweep
                        .as_ref()
                        .ok_or_else(|| field("disorder_sweep", "missing"))?;
                    Task::DisorderSweep {
                        kind: s.kind,
                        values: axis("disorder_sweep.values", &s.values)?,
                    }
                }
                Mode::Dispersive => {
                    let f = raw
                        .dispersive
                        .as_ref()
                        .and_then(|d| d.resonance_factor)
                        .unwrap_or(zeropi::dispersive::DEFAULT_RESONANCE_FACTOR);
                    if !(f >= 0.0) {
                        return Err(field("dispersive.resonance_factor", "must be non-negative"));
                    }
                    Task::Dispersive { resonance_factor: f }
                }
                Mode::WavefunctionExport => {
                    let w = raw
                        .wavefunction
                        .as_ref()
                        .ok_or_else(|| field("wavefunction", "missing"))?;
                    if w.levels.is_empty() {
                        return Err(field("wavefunction.levels", "empty"));
                    }
                    if let Some(&l) = w.levels.iter().find(|&&l| l >= k) {
                        return Err(field(
                            "wavefunction.levels",
                            format!("level {l} needs k > {l}, have k = {k}"),
                        ));
                    }
                    Task::WavefunctionExport {
                        levels: w.levels.clone(),
                    }
                }
                Mode::DmaxGrid | Mode::EjOptimize => unreachable!(),
            }
        }
    };

    if !matches!(
        mode,
        Mode::Spectrum | Mode::Dispersive | Mode::WavefunctionExport | Mode::FluxSweep | Mode::DisorderSweep
    ) && !disorder.is_symmetric()
    {
        return Err(field("disorder", format!("not used in mode {mode}")));
    }
    if mode != Mode::FluxSweep {
        unused(mode, "flux", &raw.flux)?;
    }
    if mode != Mode::DmaxGrid {
        unused(mode, "dmax", &raw.dmax)?;
    }
    if mode != Mode::DisorderSweep {
        unused(mode, "disorder_sweep", &raw.disorder_sweep)?;
    }
    if mode != Mode::Dispersive {
        unused(mode, "dispersive", &raw.dispersive)?;
    }
    if mode != Mode::WavefunctionExport {
        unused(mode, "wavefunction", &raw.wavefunction)?;
    }

    Ok(RunConfig {
        mode,
        circuit,
        disorder,
        quality,
        k,
        tol,
        refine: raw.refine.unwrap_or(true),
        max_restarts: raw
            .max_restarts
            .unwrap_or(zeropi::SolverOptions::default().max_restarts),
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        workers,
        task,
    })
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
    format!("[{}]", items.join(", "))
}

impl RunConfig {
    pub fn solver_options(&self) -> zeropi::SolverOptions {
        zeropi::SolverOptions {
            tol: self.tol,
            max_restarts: self.max_restarts,
            seed: self.seed,
            ..zeropi::SolverOptions::default()
        }
    }

    /// Fully resolved settings, one `key = value` per line.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "quality = {}", self.quality.as_str());
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "refine = {}", self.refine);
        let _ = writeln!(s, "max_restarts = {}", self.max_restarts);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        if let Some(p) = &self.circuit {
            let _ = writeln!(
                s,
                "circuit = {{ e_j = {:e}, e_l = {:e}, e_cj = {:e}, e_c_sigma = {:e}, e_c = {:e}, phi_ext = {:e} }}",
                p.e_j, p.e_l, p.e_cj, p.e_c_sigma, p.e_c, p.phi_ext
            );
        }
        let d = &self.disorder;
        let _ = writeln!(
            s,
            "disorder = {{ delta_e_j = {:e}, delta_c_j_rel = {:e}, delta_c_rel = {:e}, delta_e_l = {:e} }}",
            d.delta_e_j, d.delta_c_j_rel, d.delta_c_rel, d.delta_e_l
        );
        match &self.task {
            Task::Spectrum => {}
            Task::FluxSweep { flux } => {
                let _ = writeln!(s, "flux = {}", list(flux));
            }
            Task::DmaxGrid { e_l, e_c_sigma } => {
                let _ = writeln!(s, "dmax.e_l = {}", list(e_l));
                let _ = writeln!(s, "dmax.e_c_sigma = {}", list(e_c_sigma));
            }
            Task::EjOptimize { e_l, e_c_sigma } => {
                let _ = writeln!(s, "ej_optimize = {{ e_l = {e_l:e}, e_c_sigma = {e_c_sigma:e} }}");
            }
            Task::DisorderSweep { kind, values } => {
                let _ = writeln!(
                    s,
                    "disorder_sweep = {{ kind = {}, values = {} }}",
                    kind.as_str(),
                    list(values)
                );
            }
            Task::Dispersive { resonance_factor } => {
                let _ = writeln!(s, "dispersive.resonance_factor = {resonance_factor:e}");
            }
            Task::WavefunctionExport { levels } => {
                let _ = writeln!(s, "wavefunction.levels = {levels:?}");
            }
        }
        s
    }
}
