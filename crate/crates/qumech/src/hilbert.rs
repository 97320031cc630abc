//! Operators and states on the qubit ⊗ oscillator space.
//!
//! Basis conventions, fixed once for the whole crate:
//! - qubit index 0 is the excited state |e⟩, index 1 the ground state |g⟩,
//!   so σz = diag(+1, −1) gives |e⟩ the higher energy under H_q = ω_q σz/2;
//! - oscillator Fock states |0⟩ … |n_max⟩, dimension n_max + 1;
//! - joint kets |qubit⟩ ⊗ |fock⟩, index q·(n_max+1) + k.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR};
use crate::dynamics::DensityMatrix;
use crate::linalg::{kron, ComplexMatrix};

/// Fraction of thermal weight allowed to fall above the Fock cutoff before
/// [`thermal_oscillator`] refuses to renormalize silently.
pub const TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("fock cutoff n_max = {n_max} too small; need n_max >= 1")]
    CutoffTooSmall { n_max: usize },
    #[error("invalid thermal parameter: {context}")]
    InvalidThermal { context: String },
    #[error(
        "thermal truncation discards {tail:.3e} of the distribution at n_max = {n_max} \
         (tolerance {tol:.1e}); raise the cutoff"
    )]
    Truncation { tail: f64, n_max: usize, tol: f64 },
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    State(Box<crate::dynamics::DynamicsError>),
}

/// Highest retained Fock level; the oscillator space has dimension n_max + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FockCutoff {
    pub n_max: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self, HilbertError> {
        if n_max < 1 {
            return Err(HilbertError::CutoffTooSmall { n_max });
        }
        Ok(Self { n_max })
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Smallest cutoff keeping the thermal tail below 1e-8, plus 10 levels of
    /// headroom for the interaction-induced spreading of the state.
    pub fn for_occupation(n_m: f64) -> Self {
        let base = if n_m <= 0.0 {
            1
        } else {
            // tail above N is (n_m/(1+n_m))^(N+1) for a geometric distribution
            let ratio = n_m / (1.0 + n_m);
            let mut n = 1usize;
            while ratio.powi(n as i32 + 1) >= 1e-8 {
                n += 1;
            }
            n
        };
        Self { n_max: base + 10 }
    }
}

/// Bath occupations of the two subsystems.
///
/// `n_q` parameterizes the qubit's excited-state weight P_ee = n_q/(2 n_q + 1),
/// which stays in [0, 1/2); `n_m` is the oscillator's mean phonon number.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThermalSpec {
    pub n_m: f64,
    pub n_q: f64,
}

impl ThermalSpec {
    pub fn new(n_m: f64, n_q: f64) -> Result<Self, HilbertError> {
        if !(n_m >= 0.0) || !n_m.is_finite() {
            return Err(HilbertError::InvalidThermal { context: format!("n_m = {n_m}") });
        }
        if !(n_q >= 0.0) || !n_q.is_finite() {
            return Err(HilbertError::InvalidThermal { context: format!("n_q = {n_q}") });
        }
        Ok(Self { n_m, n_q })
    }

    /// Excited-state population of the qubit thermal state.
    pub fn p_ee(&self) -> f64 {
        self.n_q / (2.0 * self.n_q + 1.0)
    }

    /// Occupation giving a prescribed excited-state weight P_ee ∈ [0, 1/2).
    pub fn n_q_from_p_ee(p_ee: f64) -> Result<f64, HilbertError> {
        if !(0.0..0.5).contains(&p_ee) {
            return Err(HilbertError::InvalidThermal {
                context: format!("P_ee = {p_ee} outside [0, 1/2)"),
            });
        }
        Ok(p_ee / (1.0 - 2.0 * p_ee))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Standard 2×2 Pauli matrix in the |e⟩, |g⟩ basis.
pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let c = C64::new;
    match axis {
        PauliAxis::X => ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        PauliAxis::Y => ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        PauliAxis::Z => ComplexMatrix::from_vec(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

/// σ₋ = |g⟩⟨e|: relaxation toward the ground state.
pub fn sigma_minus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(1, 0)] = C64::ONE;
    m
}

/// σ₊ = |e⟩⟨g|.
pub fn sigma_plus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = C64::ONE;
    m
}

/// Truncated annihilation operator: a|k⟩ = √k |k−1⟩.
pub fn annihilation(cutoff: FockCutoff) -> ComplexMatrix {
    let d = cutoff.dim();
    let mut a = ComplexMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator a†a (diagonal on the truncated space).
pub fn number_operator(cutoff: FockCutoff) -> ComplexMatrix {
    let d = cutoff.dim();
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j { C64::new(i as f64, 0.0) } else { C64::ZERO }
    })
}

/// Dimensionless quadratures X_m = (a + a†)/√2 and P_m = (a − a†)/(i√2),
/// normalized so [X_m, P_m] = i away from the cutoff corner.
pub fn quadratures(cutoff: FockCutoff) -> (ComplexMatrix, ComplexMatrix) {
    let a = annihilation(cutoff);
    let adag = a.dagger();
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let x = (&a + &adag).scale(inv_sqrt2);
    // (a − a†)/(i√2) = −i(a − a†)/√2
    let p = (&a - &adag).scale(C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2));
    (x, p)
}

/// Thermal weight of Fock level k: n_m^k / (1 + n_m)^(k+1).
pub fn thermal_weight(n_m: f64, k: usize) -> f64 {
    if n_m <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let log_w = k as f64 * n_m.ln() - (k as f64 + 1.0) * (1.0 + n_m).ln();
    log_w.exp()
}

/// Thermal weight discarded above the cutoff, before renormalization.
pub fn thermal_tail_mass(n_m: f64, cutoff: FockCutoff) -> f64 {
    if n_m <= 0.0 {
        return 0.0;
    }
    (n_m / (1.0 + n_m)).powi(cutoff.n_max as i32 + 1)
}

/// Truncated oscillator thermal state, renormalized to unit trace.
/// Errors out if the discarded tail exceeds [`TAIL_TOL`].
pub fn thermal_oscillator(
    spec: ThermalSpec,
    cutoff: FockCutoff,
) -> Result<ComplexMatrix, HilbertError> {
    let tail = thermal_tail_mass(spec.n_m, cutoff);
    if tail > TAIL_TOL {
        return Err(HilbertError::Truncation { tail, n_max: cutoff.n_max, tol: TAIL_TOL });
    }
    let weights: Vec<f64> = (0..cutoff.dim()).map(|k| thermal_weight(spec.n_m, k)).collect();
    let norm: f64 = weights.iter().sum();
    let diag: Vec<C64> = weights.iter().map(|w| C64::new(w / norm, 0.0)).collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// Qubit thermal state P_ee |e⟩⟨e| + (1 − P_ee)|g⟩⟨g|.
pub fn thermal_qubit(spec: ThermalSpec) -> ComplexMatrix {
    let p_ee = spec.p_ee();
    ComplexMatrix::from_diagonal(&[C64::new(p_ee, 0.0), C64::new(1.0 - p_ee, 0.0)])
}

/// Bose–Einstein occupation n = 1/(exp(ħω/k_B T) − 1), SI inputs.
/// T = 0 returns exactly 0.
pub fn bose_einstein(omega: f64, temperature: f64) -> f64 {
    assert!(omega > 0.0, "bose_einstein requires omega > 0");
    assert!(temperature >= 0.0, "bose_einstein requires T >= 0");
    if temperature == 0.0 {
        return 0.0;
    }
    occupation_from_ratio(HBAR * omega / (BOLTZMANN * temperature))
}

/// Occupation as a function of the dimensionless ratio x = ħω/(k_B T).
/// Uses exp_m1 so the classical limit x → 0 stays accurate.
pub fn occupation_from_ratio(x: f64) -> f64 {
    assert!(x > 0.0, "occupation ratio must be positive");
    1.0 / x.exp_m1()
}

/// Joint initial state: thermal qubit ⊗ thermal oscillator. Fully incoherent
/// (diagonal in the product Fock basis), unit trace.
pub fn initial_state(spec: ThermalSpec, cutoff: FockCutoff) -> Result<DensityMatrix, HilbertError> {
    let q = thermal_qubit(spec);
    let m = thermal_oscillator(spec, cutoff)?;
    let joint = kron(&q, &m)?;
    DensityMatrix::new(joint, (2, cutoff.dim())).map_err(|e| HilbertError::State(Box::new(e)))
}
