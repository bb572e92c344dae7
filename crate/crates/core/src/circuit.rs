//! Circuit parameters, normal-mode coordinates and potential energies of the
//! 0-π device.
//!
//! All energies are measured in units of the junction plasma energy ħω_p
//! unless a function says otherwise. Phases are dimensionless (radians).

use crate::error::{invalid, Result};

/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge in C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

const DECOMPOSITION_RTOL: f64 = 1e-9;

/// Energy scales and external flux of the symmetric device.
///
/// `e_c` is the charging energy of one cross-capacitor. It is redundant with
/// `e_c_sigma` and `e_cj` through `1/E_CΣ = 1/E_C + 1/E_CJ` and is kept so the
/// χ-mode quantities do not have to re-derive it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    pub e_j: f64,
    pub e_l: f64,
    pub e_c_sigma: f64,
    pub e_c: f64,
    pub e_cj: f64,
    pub phi_ext: f64,
}

impl CircuitParams {
    /// Builds parameters from the inverse ratios ħω_p/E_L, ħω_p/E_CΣ and
    /// ħω_p/E_J, slaving the junction charging energy to E_CJ·E_J = 1/8.
    pub fn from_ratios(
        omega_over_e_l: f64,
        omega_over_e_c_sigma: f64,
        omega_over_e_j: f64,
        phi_ext: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_p_over_e_l", omega_over_e_l),
            ("omega_p_over_e_c_sigma", omega_over_e_c_sigma),
            ("omega_p_over_e_j", omega_over_e_j),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        let e_j = 1.0 / omega_over_e_j;
        let e_cj = 1.0 / (8.0 * e_j);
        Self::from_energies(
            e_j,
            1.0 / omega_over_e_l,
            e_cj,
            1.0 / omega_over_e_c_sigma,
            None,
            phi_ext,
        )
    }

    /// Builds parameters from raw energies.
    ///
    /// When `e_c` is `None` it is derived from `1/E_C = 1/E_CΣ − 1/E_CJ`;
    /// otherwise the decomposition is checked. `e_j` may be zero, which turns
    /// the junction potential off entirely.
    pub fn from_energies(
        e_j: f64,
        e_l: f64,
        e_cj: f64,
        e_c_sigma: f64,
        e_c: Option<f64>,
        phi_ext: f64,
    ) -> Result<Self> {
        if !(e_j.is_finite() && e_j >= 0.0) {
            return Err(invalid("e_j", format!("must be non-negative and finite, got {e_j}")));
        }
        for (name, v) in [("e_l", e_l), ("e_cj", e_cj), ("e_c_sigma", e_c_sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !phi_ext.is_finite() {
            return Err(invalid("phi_ext", "must be finite"));
        }
        if e_c_sigma >= e_cj {
            return Err(invalid(
                "e_c_sigma",
                format!("C_Σ = C_J + C requires E_CΣ < E_CJ ({e_c_sigma} >= {e_cj})"),
            ));
        }
        let implied = 1.0 / (1.0 / e_c_sigma - 1.0 / e_cj);
        let e_c = match e_c {
            None => implied,
            Some(v) => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid("e_c", format!("must be positive and finite, got {v}")));
                }
                let lhs = 1.0 / e_c_sigma;
                let rhs = 1.0 / v + 1.0 / e_cj;
                if (lhs - rhs).abs() > DECOMPOSITION_RTOL * lhs {
                    return Err(invalid("e_c", format!("1/E_CΣ = {lhs} but 1/E_C + 1/E_CJ = {rhs}")));
                }
                v
            }
        };
        Ok(Self {
            e_j,
            e_l,
            e_c_sigma,
            e_c,
            e_cj,
            phi_ext,
        })
    }

    pub fn with_phi_ext(mut self, phi_ext: f64) -> Self {
        self.phi_ext = phi_ext;
        self
    }

    /// Replaces E_J at fixed plasma energy, re-slaving E_CJ = 1/(8·E_J) and
    /// the cross-capacitor energy.
    pub fn with_plasma_slaved_e_j(&self, e_j: f64) -> Result<Self> {
        Self::from_energies(e_j, self.e_l, 1.0 / (8.0 * e_j), self.e_c_sigma, None, self.phi_ext)
    }
}

/// Pairwise deviations of nominally identical elements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisorderParams {
    /// δE_J = (E_J1 − E_J2)/2
    pub delta_e_j: f64,
    /// δC_J/C_J
    pub delta_c_j_rel: f64,
    /// δC/C
    pub delta_c_rel: f64,
    /// δE_L
    pub delta_e_l: f64,
}

impl DisorderParams {
    pub const NONE: Self = Self {
        delta_e_j: 0.0,
        delta_c_j_rel: 0.0,
        delta_c_rel: 0.0,
        delta_e_l: 0.0,
    };

    pub fn new(delta_e_j: f64, delta_c_j_rel: f64, delta_c_rel: f64, delta_e_l: f64) -> Result<Self> {
        let d = Self {
            delta_e_j,
            delta_c_j_rel,
            delta_c_rel,
            delta_e_l,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_e_j.is_finite() && self.delta_e_l.is_finite()) {
            return Err(invalid("delta_e_j/delta_e_l", "must be finite"));
        }
        if !(self.delta_c_j_rel.abs() <= 1.0) {
            return Err(invalid("delta_c_j_rel", "|δC_J/C_J| must be <= 1"));
        }
        if !(self.delta_c_rel.abs() < 1.0) {
            return Err(invalid("delta_c_rel", "|δC/C| must be < 1"));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta_e_j == 0.0 && self.delta_c_j_rel == 0.0 && self.delta_c_rel == 0.0 && self.delta_e_l == 0.0
    }
}

/// Normal-mode phases that diagonalize the kinetic energy. Σ decouples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormalCoords {
    pub phi: f64,
    pub theta: f64,
    pub chi: f64,
    pub sigma: f64,
}

pub fn node_to_normal(nodes: [f64; 4]) -> NormalCoords {
    let [p1, p2, p3, p4] = nodes;
    NormalCoords {
        phi: 0.5 * ((p2 - p3) + (p4 - p1)),
        chi: 0.5 * ((p2 - p3) - (p4 - p1)),
        theta: 0.5 * ((p2 - p1) - (p4 - p3)),
        sigma: p1 + p2 + p3 + p4,
    }
}

pub fn normal_to_node(c: NormalCoords) -> [f64; 4] {
    let NormalCoords { phi, theta, chi, sigma } = c;
    // Σ is the plain sum of node phases, so each node carries Σ/4.
    let s = 0.5 * sigma;
    [
        0.5 * (s - theta - phi + chi),
        0.5 * (s + theta + phi + chi),
        0.5 * (s + theta - phi - chi),
        0.5 * (s - theta + phi - chi),
    ]
}

/// V(φ, θ) of the symmetric device, including the +2E_J offset.
pub fn potential_symmetric(p: &CircuitParams, phi: f64, theta: f64) -> f64 {
    -2.0 * p.e_j * theta.cos() * (phi - 0.5 * p.phi_ext).cos() + p.e_l * phi * phi + 2.0 * p.e_j
}

/// Full potential U(φ, θ, χ) with junction and inductor disorder.
pub fn potential_disordered(p: &CircuitParams, d: &DisorderParams, phi: f64, theta: f64, chi: f64) -> f64 {
    potential_symmetric(p, phi, theta)
        + 2.0 * d.delta_e_j * theta.sin() * (phi - 0.5 * p.phi_ext).sin()
        + p.e_l * chi * chi
        + 2.0 * d.delta_e_l * phi * chi
}

/// Separable double-well model V′ = −2E_J|cos θ| + E_L φ² + 2E_J.
pub fn potential_toy(p: &CircuitParams, phi: f64, theta: f64) -> f64 {
    -2.0 * p.e_j * theta.cos().abs() + p.e_l * phi * phi + 2.0 * p.e_j
}

/// Oscillation frequencies in energy units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub omega_p: f64,
    pub omega_chi: f64,
}

pub fn derived_scales(p: &CircuitParams) -> DerivedScales {
    DerivedScales {
        omega_p: (8.0 * p.e_j * p.e_cj).sqrt(),
        omega_chi: (8.0 * p.e_l * p.e_c).sqrt(),
    }
}

/// Element values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits {
    /// Superinductance L = Φ₀²/E_L, henries.
    pub inductance: f64,
    /// Cross-capacitance C = e²/(2E_C), farads.
    pub capacitance: f64,
    /// Sum capacitance C_Σ = e²/(2E_CΣ), farads.
    pub sum_capacitance: f64,
    /// Junction capacitance C_J = e²/(2E_CJ), farads.
    pub junction_capacitance: f64,
}

/// Converts energies given in units of ħω_p to element values for a plasma
/// frequency `f_p` in Hz. Φ₀ here is the reduced flux quantum ħ/2e.
pub fn physical_units(p: &CircuitParams, f_p: f64) -> Result<PhysicalUnits> {
    if !(f_p.is_finite() && f_p > 0.0) {
        return Err(invalid("f_p", format!("must be positive, got {f_p}")));
    }
    let hbar = PLANCK / (2.0 * std::f64::consts::PI);
    let unit = PLANCK * f_p;
    let flux_quantum = hbar / (2.0 * ELEMENTARY_CHARGE);
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    Ok(PhysicalUnits {
        inductance: flux_quantum * flux_quantum / (p.e_l * unit),
        capacitance: e2 / (2.0 * p.e_c * unit),
        sum_capacitance: e2 / (2.0 * p.e_c_sigma * unit),
        junction_capacitance: e2 / (2.0 * p.e_cj * unit),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub e_j_over_e_l: f64,
    pub e_j_over_e_c_sigma: f64,
    pub e_cj_over_e_l: f64,
    pub e_cj_over_e_c_sigma: f64,
    pub threshold: f64,
    /// True iff every ratio exceeds `threshold`.
    pub degenerate_regime: bool,
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

/// Checks E_L, E_CΣ ≪ E_J, E_CJ.
pub fn regime_check(p: &CircuitParams, threshold: f64) -> RegimeReport {
    let r = [p.e_j / p.e_l, p.e_j / p.e_c_sigma, p.e_cj / p.e_l, p.e_cj / p.e_c_sigma];
    RegimeReport {
        e_j_over_e_l: r[0],
        e_j_over_e_c_sigma: r[1],
        e_cj_over_e_l: r[2],
        e_cj_over_e_c_sigma: r[3],
        threshold,
        degenerate_regime: r.iter().all(|&x| x > threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fig3() -> CircuitParams {
        CircuitParams::from_ratios(1e4, 2.2e3, 7.9, 0.0).unwrap()
    }

    #[test]
    fn node_normal_examples() {
        assert_eq!(node_to_normal([0.0; 4]), NormalCoords::default());
        let c = node_to_normal([-0.5, 0.5, 0.5, -0.5]);
        assert_eq!((c.phi, c.theta, c.chi, c.sigma), (0.0, 1.0, 0.0, 0.0));
        let n = normal_to_node(NormalCoords {
            phi: 0.0,
            theta: 1.0,
            chi: 0.0,
            sigma: 0.0,
        });
        assert_eq!(n, [-0.5, 0.5, 0.5, -0.5]);
        assert_eq!(normal_to_node(NormalCoords::default()), [0.0; 4]);
    }

    proptest! {
        #[test]
        fn coordinate_round_trip(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64, d in -10.0..10.0f64) {
            let back = normal_to_node(node_to_normal([a, b, c, d]));
            for (x, y) in back.iter().zip([a, b, c, d]) {
                prop_assert!((x - y).abs() < 1e-13);
            }
        }

        #[test]
        fn symmetric_potential_nonnegative(phi in -50.0..50.0f64, theta in -7.0..7.0f64, flux in -7.0..7.0f64) {
            let p = fig3().with_phi_ext(flux);
            prop_assert!(potential_symmetric(&p, phi, theta) >= -1e-15);
        }

        #[test]
        fn parity_at_zero_flux(phi in -20.0..20.0f64, theta in -7.0..7.0f64) {
            let p = fig3();
            let v = potential_symmetric(&p, phi, theta);
            prop_assert!((v - potential_symmetric(&p, -phi, theta)).abs() < 1e-13);
            prop_assert!((v - potential_symmetric(&p, phi, -theta)).abs() < 1e-13);
        }

        #[test]
        fn flux_shift_by_two_pi(phi in -20.0..20.0f64, theta in -7.0..7.0f64, flux in -7.0..7.0f64) {
            let p = fig3().with_phi_ext(flux);
            let q = fig3().with_phi_ext(flux + 2.0 * PI);
            let lhs = potential_symmetric(&p, phi, theta);
            let rhs = potential_symmetric(&q, phi, theta + PI);
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn toy_is_separable(phi in -20.0..20.0f64, theta in -7.0..7.0f64) {
            let p = fig3();
            let a = potential_toy(&p, phi, theta) - potential_toy(&p, phi, 0.0);
            let b = potential_toy(&p, 0.0, theta) - potential_toy(&p, 0.0, 0.0);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_potential_examples() {
        let p = fig3();
        assert_eq!(potential_symmetric(&p, 0.0, 0.0), 0.0);
        assert!((potential_symmetric(&p, 0.0, PI) - 4.0 * p.e_j).abs() < 1e-15);
        // The junction term vanishes at φ = φ_ext/2; only the inductive
        // envelope E_L·φ² remains.
        let q = p.with_phi_ext(PI);
        let v = potential_symmetric(&q, PI / 2.0, 0.0);
        assert!((v - p.e_l * PI * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn disordered_potential_examples() {
        let p = fig3();
        let none = DisorderParams::NONE;
        for &(phi, theta) in &[(0.3, 1.1), (-4.0, 2.5), (10.0, -0.2)] {
            assert_eq!(
                potential_disordered(&p, &none, phi, theta, 0.0),
                potential_symmetric(&p, phi, theta)
            );
        }
        let d = DisorderParams::new(0.03, 0.0, 0.0, 0.0).unwrap();
        let a = potential_disordered(&p, &d, 0.7, 1.3, 0.0);
        let b = potential_disordered(&p, &d, -0.7, -1.3, 0.0);
        assert!((a - b).abs() < 1e-15);

        let d = DisorderParams::new(0.0, 0.0, 0.0, 2e-5).unwrap();
        let at_one = potential_disordered(&p, &d, 1.0, 0.0, 1.0);
        let at_zero = potential_disordered(&p, &d, 1.0, 0.0, 0.0);
        assert!((at_one - at_zero - (p.e_l + 2.0 * d.delta_e_l)).abs() < 1e-15);
    }

    #[test]
    fn toy_potential_examples() {
        let p = fig3();
        assert_eq!(potential_toy(&p, 0.0, 0.0), 0.0);
        assert!(potential_toy(&p, 0.0, PI).abs() < 1e-15);
        let v = potential_toy(&p, 3.0, PI / 2.0);
        assert!((v - (2.0 * p.e_j + 9.0 * p.e_l)).abs() < 1e-15);
    }

    #[test]
    fn ratio_constructor_slaves_junction_charging() {
        let p = CircuitParams::from_ratios(1e3, 1e3, 7.9, 0.0).unwrap();
        assert!((p.e_cj - 7.9 / 8.0).abs() < 1e-15);
        assert!((p.e_cj * p.e_j - 0.125).abs() < 1e-15);
        assert!((1.0 / p.e_c_sigma - 1.0 / p.e_c - 1.0 / p.e_cj).abs() < 1e-9);
        assert!((derived_scales(&p).omega_p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn explicit_decomposition_is_checked() {
        let ok = CircuitParams::from_energies(0.1, 1e-3, 1.25, 1e-3, None, 0.0).unwrap();
        assert!(CircuitParams::from_energies(0.1, 1e-3, 1.25, 1e-3, Some(ok.e_c), 0.0).is_ok());
        let err = CircuitParams::from_energies(0.1, 1e-3, 1.25, 1e-3, Some(2e-3), 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "e_c", .. }));
        assert!(CircuitParams::from_energies(0.1, -1e-3, 1.25, 1e-3, None, 0.0).is_err());
        assert!(CircuitParams::from_energies(0.1, 1e-3, 1e-3, 2e-3, None, 0.0).is_err());
    }

    #[test]
    fn derived_scale_relations() {
        let p = CircuitParams::from_energies(0.2, 1e-3, 0.6, 1e-3, None, 0.0).unwrap();
        let s = derived_scales(&p);
        let q = CircuitParams::from_energies(0.8, 1e-3, 0.6, 1e-3, None, 0.0).unwrap();
        assert!((derived_scales(&q).omega_p / s.omega_p - 2.0).abs() < 1e-14);
        assert!((s.omega_chi - (8.0 * p.e_l * p.e_c).sqrt()).abs() < 1e-16);
        let ratio = s.omega_chi / s.omega_p;
        assert!((ratio - (p.e_l * p.e_c / (p.e_j * p.e_cj)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn physical_units_scale() {
        let p = CircuitParams::from_ratios(1e3, 1e3, 1.0 / 0.17, 0.0).unwrap();
        let u = physical_units(&p, 40e9).unwrap();
        assert!((u.inductance - 4.0e-6).abs() < 0.4e-6, "L = {}", u.inductance);
        let v = physical_units(&p, 80e9).unwrap();
        assert!((u.inductance / v.inductance - 2.0).abs() < 1e-12);
        assert!(physical_units(&p, 0.0).is_err());
    }

    #[test]
    fn regime_flag() {
        let all = CircuitParams::from_energies(1.0, 1e-3, 1.0, 1e-3, None, 0.0).unwrap();
        assert!(regime_check(&all, DEFAULT_REGIME_THRESHOLD).degenerate_regime);
        let bad = CircuitParams::from_energies(1e-3, 1e-3, 1.0, 1e-4, None, 0.0).unwrap();
        assert!(!regime_check(&bad, DEFAULT_REGIME_THRESHOLD).degenerate_regime);
        let r = regime_check(&fig3(), DEFAULT_REGIME_THRESHOLD);
        assert!(r.degenerate_regime, "{r:?}");
    }
}
