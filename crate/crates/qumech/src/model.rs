//! System Hamiltonian and Lindblad channel list.
//!
//! The joint Hamiltonian, in units of the mechanical frequency, is
//!
//! ```text
//! H = (ω_q/2) σz ⊗ I + (ω_m/2) I ⊗ (X² + P²)
//!     + √2 (g_x σx + g_y σy + g_z σz) ⊗ X + √2 g_m I ⊗ X
//! ```
//!
//! with g_x = g0 sinθ cosφ, g_y = g0 sinθ sinφ, g_z = g0 cosθ. The oscillator
//! free term keeps the zero-point constant so ⟨H⟩ checks match hand
//! computation. The constant shift g_m enters with the same √2 normalization
//! as the other coupling components (the dimensionful position is
//! x = √2 x_zpf X).

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::hilbert::{
    annihilation, pauli, quadratures, sigma_minus, sigma_plus, FockCutoff, PauliAxis, ThermalSpec,
};
use crate::linalg::{kron, ComplexMatrix};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {context}")]
    InvalidParam { context: String },
    #[error(transparent)]
    Hilbert(#[from] crate::hilbert::HilbertError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// All model constants, in units where ω_m is typically 1.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Mechanical angular frequency (reference unit).
    pub omega_m: f64,
    /// Qubit transition frequency, same units.
    pub omega_q: f64,
    /// Coupling magnitude g0.
    pub g0: f64,
    /// Polar coupling angle θ (mixes σx and σz channels).
    pub theta: f64,
    /// Azimuthal coupling angle φ (σy channel; 0 in practice).
    pub phi: f64,
    /// Oscillator bath occupation.
    pub n_m: f64,
    /// Qubit bath occupation parameter.
    pub n_q: f64,
    /// Mechanical relaxation rate.
    pub gamma_m: f64,
    /// Qubit relaxation rate 1/T1.
    pub gamma_q1: f64,
    /// Qubit-independent shift coupling.
    pub g_m: f64,
    /// Fock truncation of the oscillator space.
    pub cutoff: FockCutoff,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_m: 1.0,
            omega_q: 1.0,
            g0: 0.0,
            theta: 0.0,
            phi: 0.0,
            n_m: 0.0,
            n_q: 0.0,
            gamma_m: 0.0,
            gamma_q1: 0.0,
            g_m: 0.0,
            cutoff: FockCutoff { n_max: 11 },
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |context: String| Err(ModelError::InvalidParam { context });
        if !(self.omega_m > 0.0) {
            return bad(format!("omega_m = {} must be > 0", self.omega_m));
        }
        if !(self.omega_q >= 0.0) {
            return bad(format!("omega_q = {} must be >= 0", self.omega_q));
        }
        for (name, v) in [
            ("n_m", self.n_m),
            ("n_q", self.n_q),
            ("gamma_m", self.gamma_m),
            ("gamma_q1", self.gamma_q1),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{name} = {v} must be >= 0"));
            }
        }
        for (name, v) in [
            ("g0", self.g0),
            ("theta", self.theta),
            ("phi", self.phi),
            ("g_m", self.g_m),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} = {v} must be finite"));
            }
        }
        if self.detuning() < -self.omega_m {
            return bad(format!(
                "detuning {} below -omega_m = {}",
                self.detuning(),
                -self.omega_m
            ));
        }
        if self.cutoff.n_max < 1 {
            return bad("cutoff n_max must be >= 1".into());
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        self.omega_q - self.omega_m
    }

    /// (g_x, g_y, g_z) from the Bloch-space direction (θ, φ).
    pub fn couplings(&self) -> (f64, f64, f64) {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        (self.g0 * st * cp, self.g0 * st * sp, self.g0 * ct)
    }

    pub fn g_x(&self) -> f64 {
        self.couplings().0
    }

    pub fn g_z(&self) -> f64 {
        self.couplings().2
    }

    pub fn thermal_spec(&self) -> ThermalSpec {
        ThermalSpec { n_m: self.n_m, n_q: self.n_q }
    }

    /// Joint-space dimension 2(n_max + 1).
    pub fn dim(&self) -> usize {
        2 * self.cutoff.dim()
    }
}

/// One dissipation channel of the master equation: the evolution picks up
/// (rate/2)·(2 O ρ O† − O†O ρ − ρ O†O).
#[derive(Clone, Debug)]
pub struct LindbladChannel {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Full Hamiltonian on the joint space (Hermitian, dim 2(n_max+1)).
pub fn hamiltonian(p: &SystemParams) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let d = p.cutoff.dim();
    let i_q = ComplexMatrix::identity(2);
    let i_m = ComplexMatrix::identity(d);
    let (x, pq) = quadratures(p.cutoff);

    // free terms
    let hq = kron(&pauli(PauliAxis::Z).scale(C64::new(p.omega_q / 2.0, 0.0)), &i_m)?;
    let x2p2 = &(&x * &x) + &(&pq * &pq);
    let hm = kron(&i_q, &x2p2.scale(C64::new(p.omega_m / 2.0, 0.0)))?;

    // coupling √2 (g_x σx + g_y σy + g_z σz + g_m I) ⊗ X
    let (g_x, g_y, g_z) = p.couplings();
    let mut qubit_op = ComplexMatrix::zeros(2, 2);
    qubit_op.add_scaled(&pauli(PauliAxis::X), C64::new(g_x, 0.0));
    qubit_op.add_scaled(&pauli(PauliAxis::Y), C64::new(g_y, 0.0));
    qubit_op.add_scaled(&pauli(PauliAxis::Z), C64::new(g_z, 0.0));
    qubit_op.add_scaled(&i_q, C64::new(p.g_m, 0.0));
    let hint = kron(&qubit_op, &x)?.scale(C64::new(2f64.sqrt(), 0.0));

    let mut h = &hq + &hm;
    h.add_scaled(&hint, C64::ONE);
    Ok(h)
}

/// The four collapse channels, embedded on the joint space; zero-rate
/// channels are dropped.
pub fn collapse_channels(p: &SystemParams) -> Result<Vec<LindbladChannel>, ModelError> {
    p.validate()?;
    let d = p.cutoff.dim();
    let i_q = ComplexMatrix::identity(2);
    let i_m = ComplexMatrix::identity(d);
    let a = annihilation(p.cutoff);

    let mut channels = Vec::new();
    let mut push = |op: ComplexMatrix, rate: f64| {
        if rate > 0.0 {
            channels.push(LindbladChannel { operator: op, rate });
        }
    };
    push(kron(&i_q, &a)?, p.gamma_m * (p.n_m + 1.0));
    push(kron(&i_q, &a.dagger())?, p.gamma_m * p.n_m);
    push(kron(&sigma_minus(), &i_m)?, p.gamma_q1 * (p.n_q + 1.0));
    push(kron(&sigma_plus(), &i_m)?, p.gamma_q1 * p.n_q);
    Ok(channels)
}

/// Interaction-picture Hamiltonian at time t (diagnostic only): rotating and
/// counter-rotating σ±a(†) terms at frequencies Δ and Σ = ω_q + ω_m, plus the
/// g_z displacement term at ω_m. Valid for φ = 0 and g_m = 0; at t = 0 it
/// coincides with H − H₀.
pub fn interaction_picture_hamiltonian(
    p: &SystemParams,
    t: f64,
) -> Result<ComplexMatrix, ModelError> {
    p.validate()?;
    let delta = p.detuning();
    let sigma = p.omega_q + p.omega_m;
    let (g_x, _, g_z) = p.couplings();

    let d = p.cutoff.dim();
    let a = annihilation(p.cutoff);
    let adag = a.dagger();
    let sm_a_dag = kron(&sigma_minus(), &adag)?;
    let sp_a = kron(&sigma_plus(), &a)?;
    let sp_a_dag = kron(&sigma_plus(), &adag)?;
    let sm_a = kron(&sigma_minus(), &a)?;
    let sz_adag = kron(&pauli(PauliAxis::Z), &adag)?;
    let sz_a = kron(&pauli(PauliAxis::Z), &a)?;

    let mut h = ComplexMatrix::zeros(2 * d, 2 * d);
    let gx = C64::new(g_x, 0.0);
    let gz = C64::new(g_z, 0.0);
    h.add_scaled(&sm_a_dag, gx * C64::from_polar(1.0, -delta * t));
    h.add_scaled(&sp_a, gx * C64::from_polar(1.0, delta * t));
    h.add_scaled(&sp_a_dag, gx * C64::from_polar(1.0, sigma * t));
    h.add_scaled(&sm_a, gx * C64::from_polar(1.0, -sigma * t));
    h.add_scaled(&sz_adag, gz * C64::from_polar(1.0, p.omega_m * t));
    h.add_scaled(&sz_a, gz * C64::from_polar(1.0, -p.omega_m * t));
    Ok(h)
}

/// Free part H₀ (qubit + oscillator, no coupling), used by diagnostics.
pub fn free_hamiltonian(p: &SystemParams) -> Result<ComplexMatrix, ModelError> {
    let mut free = *p;
    free.g0 = 0.0;
    free.g_m = 0.0;
    hamiltonian(&free)
}
