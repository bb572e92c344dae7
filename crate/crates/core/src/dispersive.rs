//! Disorder effects: exact junction-disorder spectra from the 2D solver, and
//! the perturbative coupling of the (φ, θ) levels to the χ oscillator through
//! capacitive and inductive disorder.
//!
//! With `Δ_ll′ = E_l − E_l′ − ħΩ_χ` the χ mode shifts level `l` by
//! `χ_l = Σ |g_ll′|²(1/Δ_ll′ − 1/Δ_l′l)` per photon and by the Lamb shift
//! `κ_l = Σ |g_ll′|²/Δ_ll′`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::circuit::{derived_scales, CircuitParams, DisorderParams};
use crate::eigen::EigenSolution;
use crate::error::{invalid, Error, Result};
use crate::grid::{d_theta, dot};
use crate::spectrum::{num, SweepPoint, SweepResult, SweepSettings};

/// Pairs with `|Δ| < DEFAULT_RESONANCE_FACTOR·|g|` are flagged and left out.
pub const DEFAULT_RESONANCE_FACTOR: f64 = 10.0;

/// Coupling magnitudes between computed levels, `k × k`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub k: usize,
    pub g_theta: Vec<f64>,
    pub g_phi: Vec<f64>,
}

impl Couplings {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            g_theta: vec![0.0; k * k],
            g_phi: vec![0.0; k * k],
        }
    }

    /// `|g_ll′|² = g_φ² + g_θ²`
    pub fn strength_sq(&self, l: usize, lp: usize) -> f64 {
        let i = l * self.k + lp;
        self.g_phi[i].powi(2) + self.g_theta[i].powi(2)
    }
}

/// Matrix elements `⟨l|∂θ|l′⟩` and `⟨l|φ|l′⟩` between the computed levels.
pub fn matrix_elements(e: &EigenSolution) -> (Vec<f64>, Vec<f64>) {
    let g = &e.grid;
    let k = e.k();
    let area = g.cell_area();
    let nt = g.n_theta();
    let dth: Vec<Vec<f64>> = e.wavefunctions.iter().map(|psi| d_theta(psi, g)).collect();
    let phis: Vec<Vec<f64>> = e
        .wavefunctions
        .iter()
        .map(|psi| psi.iter().enumerate().map(|(i, x)| g.phi(i / nt) * x).collect())
        .collect();
    let mut theta = vec![0.0; k * k];
    let mut phi = vec![0.0; k * k];
    for l in 0..k {
        for lp in 0..k {
            theta[l * k + lp] = dot(&e.wavefunctions[l], &dth[lp]) * area;
            phi[l * k + lp] = dot(&e.wavefunctions[l], &phis[lp]) * area;
        }
    }
    (theta, phi)
}

pub fn coupling_elements(e: &EigenSolution, p: &CircuitParams, d: &DisorderParams) -> Result<Couplings> {
    d.validate()?;
    let k = e.k();
    if d.delta_c_rel == 0.0 && d.delta_e_l == 0.0 {
        return Ok(Couplings::zeros(k));
    }
    let (theta, phi) = matrix_elements(e);
    let pre_theta = p.e_c_sigma * d.delta_c_rel * (32.0 * p.e_l / p.e_c).powf(0.25);
    let pre_phi = d.delta_e_l * (8.0 * p.e_c / p.e_l).powf(0.25);
    Ok(Couplings {
        k,
        g_theta: theta.iter().map(|x| (pre_theta * x).abs()).collect(),
        g_phi: phi.iter().map(|x| (pre_phi * x).abs()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveResult {
    pub omega_chi: f64,
    pub energies: Vec<f64>,
    pub couplings: Couplings,
    /// `Δ_ll′`, row-major.
    pub detunings: Vec<f64>,
    /// Stark shift per χ photon.
    pub stark: Vec<f64>,
    pub lamb: Vec<f64>,
    /// Size of the highest-level term in each sum, a proxy for what the
    /// truncation to `k` levels leaves out.
    pub stark_truncation: Vec<f64>,
    pub lamb_truncation: Vec<f64>,
    /// Ordered pairs `(l, l′)` with `|Δ_ll′|` below the resonance threshold.
    pub resonances: Vec<(usize, usize)>,
}

impl DispersiveResult {
    pub fn k(&self) -> usize {
        self.energies.len()
    }

    pub fn detuning(&self, l: usize, lp: usize) -> f64 {
        self.detunings[l * self.k() + lp]
    }

    pub fn write_couplings_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "l,l_prime,g_phi[hbar_omega_p],g_theta[hbar_omega_p],detuning[hbar_omega_p],resonant"
        )?;
        let k = self.k();
        for l in 0..k {
            for lp in 0..k {
                let i = l * k + lp;
                writeln!(
                    w,
                    "{l},{lp},{},{},{},{}",
                    num(self.couplings.g_phi[i]),
                    num(self.couplings.g_theta[i]),
                    num(self.detunings[i]),
                    self.resonances.contains(&(l, lp))
                )?;
            }
        }
        Ok(())
    }

    pub fn write_shifts_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "level,E[hbar_omega_p],chi[hbar_omega_p],kappa[hbar_omega_p],chi_truncation[hbar_omega_p],kappa_truncation[hbar_omega_p]"
        )?;
        for l in 0..self.k() {
            writeln!(
                w,
                "{l},{},{},{},{},{}",
                num(self.energies[l]),
                num(self.stark[l]),
                num(self.lamb[l]),
                num(self.stark_truncation[l]),
                num(self.lamb_truncation[l])
            )?;
        }
        Ok(())
    }
}

/// Stark and Lamb shifts from level energies and couplings. A term is
/// dropped when either detuning it involves is flagged resonant.
pub fn dispersive_shifts(
    energies: &[f64],
    couplings: &Couplings,
    omega_chi: f64,
    resonance_factor: f64,
) -> Result<DispersiveResult> {
    let k = energies.len();
    if couplings.k != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: couplings.k,
        });
    }
    if !(resonance_factor >= 0.0) {
        return Err(invalid("resonance_factor", "must be non-negative"));
    }
    let mut detunings = vec![0.0; k * k];
    let mut resonances = Vec::new();
    for l in 0..k {
        for lp in 0..k {
            let delta = energies[l] - energies[lp] - omega_chi;
            detunings[l * k + lp] = delta;
            let g2 = couplings.strength_sq(l, lp);
            if g2 > 0.0 && delta.abs() < resonance_factor * g2.sqrt() {
                resonances.push((l, lp));
            }
        }
    }
    let resonant = |a: usize, b: usize| resonances.contains(&(a, b));
    let mut stark = vec![0.0; k];
    let mut lamb = vec![0.0; k];
    let mut stark_truncation = vec![0.0; k];
    let mut lamb_truncation = vec![0.0; k];
    for l in 0..k {
        for lp in 0..k {
            let g2 = couplings.strength_sq(l, lp);
            if g2 == 0.0 {
                continue;
            }
            let (d_fwd, d_back) = (detunings[l * k + lp], detunings[lp * k + l]);
            let chi_term = if resonant(l, lp) || resonant(lp, l) {
                0.0
            } else {
                g2 * (1.0 / d_fwd - 1.0 / d_back)
            };
            let kappa_term = if resonant(l, lp) { 0.0 } else { g2 / d_fwd };
            stark[l] += chi_term;
            lamb[l] += kappa_term;
            if lp == k - 1 {
                stark_truncation[l] = chi_term.abs();
                lamb_truncation[l] = kappa_term.abs();
            }
        }
    }
    Ok(DispersiveResult {
        omega_chi,
        energies: energies.to_vec(),
        couplings: couplings.clone(),
        detunings,
        stark,
        lamb,
        stark_truncation,
        lamb_truncation,
        resonances,
    })
}

/// Couplings and shifts of the levels in `e` with the default resonance
/// threshold.
pub fn dispersive(e: &EigenSolution, p: &CircuitParams, d: &DisorderParams) -> Result<DispersiveResult> {
    let g = coupling_elements(e, p, d)?;
    dispersive_shifts(&e.energies, &g, derived_scales(p).omega_chi, DEFAULT_RESONANCE_FACTOR)
}

/// Exact spectra and D with junction asymmetry `δE_J = x·E_J` for each `x`
/// in `relative_values`, on top of the other disorder in `d`.
pub fn junction_disorder_sweep(
    p: &CircuitParams,
    d: &DisorderParams,
    relative_values: &[f64],
    k: usize,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    if let Some(x) = relative_values.iter().find(|x| !(x.abs() < 1.0)) {
        return Err(invalid("delta_e_j", format!("|δE_J/E_J| must be < 1, got {x}")));
    }
    disorder_sweep(p, relative_values, k, settings, "delta_E_J/E_J[1]", |x| {
        DisorderParams {
            delta_e_j: x * p.e_j,
            ..*d
        }
    })
}

/// D with junction-capacitance asymmetry `δC_J/C_J` for each value, so the
/// mixed-derivative term is active.
pub fn cj_disorder_check(
    p: &CircuitParams,
    d: &DisorderParams,
    relative_values: &[f64],
    k: usize,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    if let Some(x) = relative_values.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(invalid("delta_c_j_rel", format!("|δC_J/C_J| must be <= 1, got {x}")));
    }
    disorder_sweep(p, relative_values, k, settings, "delta_C_J/C_J[1]", |x| {
        DisorderParams { delta_c_j_rel: x, ..*d }
    })
}

fn disorder_sweep(
    p: &CircuitParams,
    values: &[f64],
    k: usize,
    settings: &SweepSettings,
    axis: &str,
    make: impl Fn(f64) -> DisorderParams + Sync,
) -> Result<SweepResult> {
    if k < 3 {
        return Err(Error::TooFewLevels { needed: 3, have: k });
    }
    let points = values
        .par_iter()
        .map(|&x| SweepPoint::from_solution(vec![x], settings.solve(p, &make(x), k)))
        .collect();
    Ok(SweepResult {
        axis_names: vec![axis.into()],
        k,
        points,
    })
}
