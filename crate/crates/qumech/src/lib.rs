//! Simulation of a qubit coupled to a mechanical oscillator.
//!
//! The crate models a two-level system (a charge qubit) coupled to a single
//! mechanical mode through both transverse and longitudinal channels,
//! starting from thermal states of both parties. It provides:
//!
//! - dense complex linear algebra kernels ([`linalg`]),
//! - operators and thermal states on the truncated joint Hilbert space
//!   ([`hilbert`]),
//! - the system Hamiltonian and Lindblad collapse channels ([`model`]),
//! - unitary (spectral) and dissipative (RK4 Lindblad) evolution with
//!   coherence figures of merit and state-health monitoring ([`dynamics`]),
//! - the electromechanical circuit derivation of the coupling rates
//!   ([`circuit`]),
//! - closed-form short-time expansions used as independent oracles
//!   ([`analytics`]),
//! - parameter sweeps with presets, parallel execution and CSV/JSON output
//!   ([`sweep`]).
//!
//! All simulation quantities are expressed in units of the mechanical
//! frequency `omega_m` (times in `1/omega_m`); the circuit module works in SI
//! and converts once.

pub mod analytics;
pub mod circuit;
pub mod constants;
pub mod dynamics;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod sweep;

pub use linalg::{ComplexMatrix, HermitianEigen};
pub use model::SystemParams;
