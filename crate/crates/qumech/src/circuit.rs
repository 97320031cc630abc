//! From circuit elements to qubit-mechanical coupling rates.
//!
//! A charge qubit (Cooper-pair box) sits in a capacitive bridge whose two
//! mechanically compliant capacitors C_m±(x) are modulated with opposite
//! phase by the oscillator motion. The motion shifts the effective gate
//! voltage and offset charge, which near the charge degeneracy point turns
//! into transverse (g_x) and longitudinal (g_z) couplings plus a small
//! qubit-independent shift g_m = g0(1 − 2 n_g).
//!
//! Everything here is SI: energies in joules, capacitances in farads,
//! lengths in meters, voltages in volts. Outputs are converted to angular
//! frequencies (rad/s) by a single division by ħ at the end
//! ([`derive_couplings`]); downstream simulation stays in ω_m-normalized
//! units via one explicit rescale.

use thiserror::Error;

use crate::constants::{ELEMENTARY_CHARGE, HBAR};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("invalid circuit parameter: {context}")]
    InvalidParam { context: String },
    #[error("plate collision: |x| = {x:.3e} m >= x_0 = {x0:.3e} m")]
    PlateCollision { x: f64, x0: f64 },
}

/// Physical constants of the electromechanical circuit.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Charging energy E_c, J.
    pub e_c_joule: f64,
    /// Josephson energy E_J, J.
    pub e_j_joule: f64,
    /// Fixed bridge capacitance C_0, F.
    pub c_0_farad: f64,
    /// Static mechanical capacitance C_m^0, F.
    pub c_m0_farad: f64,
    /// Static plate separation x_0, m.
    pub x_0_meter: f64,
    /// Mechanical zero-point fluctuation x_zpf, m.
    pub x_zpf_meter: f64,
    /// DC bias voltage V_dc, V.
    pub v_dc_volt: f64,
    /// Dimensionless static offset charge n_g.
    pub n_g: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<(), CircuitError> {
        let positive = [
            ("e_j_joule", self.e_j_joule),
            ("c_0_farad", self.c_0_farad),
            ("c_m0_farad", self.c_m0_farad),
            ("x_0_meter", self.x_0_meter),
            ("x_zpf_meter", self.x_zpf_meter),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(CircuitError::InvalidParam {
                    context: format!("{name} = {v} must be > 0"),
                });
            }
        }
        if !(self.e_c_joule > 0.0) {
            return Err(CircuitError::InvalidParam {
                context: format!("e_c_joule = {} must be > 0", self.e_c_joule),
            });
        }
        if !self.v_dc_volt.is_finite() || !self.n_g.is_finite() {
            return Err(CircuitError::InvalidParam { context: "non-finite input".into() });
        }
        Ok(())
    }

    /// The qubit is charge-noise protected only close to n_g = 1/2.
    pub fn near_degeneracy(&self) -> bool {
        (self.n_g - 0.5).abs() < 0.05
    }

    fn check_displacement(&self, x: f64) -> Result<(), CircuitError> {
        if x.abs() >= self.x_0_meter {
            return Err(CircuitError::PlateCollision { x, x0: self.x_0_meter });
        }
        Ok(())
    }
}

/// Coupling rates and qubit frequency extracted from the circuit, in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DerivedCouplings {
    /// Single-phonon coupling magnitude g0, rad/s.
    pub g0: f64,
    /// Mixing angle θ0 = arctan[4E_c(1 − 2n_g)/E_J], rad.
    pub theta0: f64,
    /// Bloch-sphere coupling angle θ = θ0 + π/2, rad.
    pub theta: f64,
    /// Transverse coupling g_x = g0 cos θ0 = g0 sin θ, rad/s.
    pub g_x: f64,
    /// Longitudinal coupling g_z = −g0 sin θ0 = g0 cos θ, rad/s.
    pub g_z: f64,
    /// Qubit-independent shift g_m = g0 (1 − 2 n_g), rad/s.
    pub g_m: f64,
    /// Qubit frequency ω_q = √(E_J² + (4E_c)²(1−2n_g)²)/ħ, rad/s.
    pub omega_q: f64,
}

impl DerivedCouplings {
    /// Dimensionless couplings in units of a mechanical frequency (rad/s):
    /// (g0, θ, g_m, ω_q)/ω_m ready for simulation parameters.
    pub fn normalized(&self, omega_m: f64) -> (f64, f64, f64, f64) {
        (self.g0 / omega_m, self.theta, self.g_m / omega_m, self.omega_q / omega_m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoltageMode {
    /// Full bridge expression with C_m±(x).
    Exact,
    /// First order in x/x_0.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacitanceMode {
    /// Series-parallel combination with C_m±(x).
    Exact,
    /// The x-independent value (C_0 + C_m^0)/2.
    Constant,
}

/// Mechanically modulated capacitances C_m±(x) = C_m^0/(1 ± x/x_0).
pub fn mechanical_capacitances(x: f64, c: &CircuitParams) -> Result<(f64, f64), CircuitError> {
    c.check_displacement(x)?;
    let r = x / c.x_0_meter;
    Ok((c.c_m0_farad / (1.0 + r), c.c_m0_farad / (1.0 - r)))
}

/// Voltage across the qubit terminals as a function of plate displacement.
pub fn gate_voltage(x: f64, c: &CircuitParams, mode: VoltageMode) -> Result<f64, CircuitError> {
    c.check_displacement(x)?;
    match mode {
        VoltageMode::Exact => {
            let (c_plus, c_minus) = mechanical_capacitances(x, c)?;
            Ok(c.v_dc_volt
                * (c_minus / (c_minus + c.c_0_farad) - c_plus / (c_plus + c.c_0_farad)))
        }
        VoltageMode::Linear => {
            let csum = c.c_m0_farad + c.c_0_farad;
            Ok(2.0 * c.v_dc_volt * c.c_m0_farad * c.c_0_farad / (csum * csum)
                * (x / c.x_0_meter))
        }
    }
}

/// Equivalent gate capacitance seen by the qubit.
pub fn gate_capacitance(
    x: f64,
    c: &CircuitParams,
    mode: CapacitanceMode,
) -> Result<f64, CircuitError> {
    c.check_displacement(x)?;
    match mode {
        CapacitanceMode::Exact => {
            let (c_plus, c_minus) = mechanical_capacitances(x, c)?;
            let inv = 1.0 / (c.c_0_farad + c_minus) + 1.0 / (c.c_0_farad + c_plus);
            Ok(1.0 / inv)
        }
        CapacitanceMode::Constant => Ok(0.5 * (c.c_0_farad + c.c_m0_farad)),
    }
}

/// Linearized motion-induced offset charge
/// n_g(x) = V_dc/(2e x_0) · C_m^0 C_0/(C_0 + C_m^0) · x.
pub fn offset_charge(x: f64, c: &CircuitParams) -> Result<f64, CircuitError> {
    c.check_displacement(x)?;
    Ok(offset_charge_derivative(c) * x)
}

/// dn_g/dx, constant in the linear model.
pub fn offset_charge_derivative(c: &CircuitParams) -> f64 {
    c.v_dc_volt / (2.0 * ELEMENTARY_CHARGE * c.x_0_meter) * c.c_m0_farad * c.c_0_farad
        / (c.c_0_farad + c.c_m0_farad)
}

/// Qubit gap and the two n = 0 subspace eigenenergies, all in joules.
///
/// ω_q = √(E_J² + (4E_c)²(1 − 2n_g)²);
/// λ±⁽⁰⁾ = 4E_c n_g² − 4E_c n_g + 2E_c ± ω_q/2 (taken as printed; only the
/// branch difference λ₊ − λ₋ = ω_q is load-bearing downstream).
pub fn qubit_spectrum(n_g: f64, e_c: f64, e_j: f64) -> (f64, f64, f64) {
    let four_ec = 4.0 * e_c;
    let omega_q = (e_j * e_j + four_ec * four_ec * (1.0 - 2.0 * n_g).powi(2)).sqrt();
    let shared = four_ec * n_g * n_g - four_ec * n_g + 2.0 * e_c;
    (omega_q, shared + 0.5 * omega_q, shared - 0.5 * omega_q)
}

/// All coupling rates of the two-level model, in rad/s.
pub fn derive_couplings(c: &CircuitParams) -> Result<DerivedCouplings, CircuitError> {
    c.validate()?;
    let g0_energy = 4.0 * c.e_c_joule / (2.0 * ELEMENTARY_CHARGE)
        * (c.c_m0_farad * c.c_0_farad / (c.c_0_farad + c.c_m0_farad))
        * (c.x_zpf_meter / c.x_0_meter)
        * c.v_dc_volt;
    let g0 = g0_energy / HBAR;
    let theta0 = (4.0 * c.e_c_joule * (1.0 - 2.0 * c.n_g) / c.e_j_joule).atan();
    let theta = theta0 + std::f64::consts::FRAC_PI_2;
    let (omega_q_energy, _, _) = qubit_spectrum(c.n_g, c.e_c_joule, c.e_j_joule);
    Ok(DerivedCouplings {
        g0,
        theta0,
        theta,
        g_x: g0 * theta0.cos(),
        g_z: -g0 * theta0.sin(),
        g_m: g0 * (1.0 - 2.0 * c.n_g),
        omega_q: omega_q_energy / HBAR,
    })
}
