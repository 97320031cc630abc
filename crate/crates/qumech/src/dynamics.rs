//! Time evolution of the joint density matrix and coherence figures of merit.
//!
//! Two backends:
//! - [`UnitaryEvolution`]: exact propagation ρ(t) = e^{−iHt} ρ(0) e^{iHt}
//!   through the spectral decomposition of H;
//! - [`evolve_lindblad`]: classical fourth-order Runge–Kutta on the
//!   matrix-valued master-equation right-hand side
//!   dρ/dt = −i[H,ρ] + Σ (γ/2)(2OρO† − O†Oρ − ρO†O),
//!   with automatic step halving until grid convergence.
//!
//! Both record the same observable series and per-sample health checks
//! (trace error, Hermiticity, positivity, Fock-tail mass). Health breaches
//! abort with diagnostics; nothing is silently clipped or renormalized.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::hilbert::{pauli, quadratures, FockCutoff, PauliAxis};
use crate::linalg::{
    hermitian_eigen, is_positive_within, kron, matmul, matmul_into, min_eigenvalue,
    ComplexMatrix, HermitianEigen,
};
use crate::model::{collapse_channels, hamiltonian, SystemParams};

/// Hermiticity tolerance for a stored state.
pub const STATE_HERMITICITY_TOL: f64 = 1e-9;
/// Allowed deviation of Tr ρ from 1 for a stored state.
pub const STATE_TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated before a state is rejected.
pub const POSITIVITY_FLOOR: f64 = -1e-8;
/// Trace drift at which an integration aborts.
pub const TRACE_DRIFT_ABORT: f64 = 1e-6;
/// Population allowed in the top three Fock levels before a trajectory is
/// declared untrustworthy.
pub const TAIL_MASS_LIMIT: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid density matrix: {context}")]
    InvalidState { context: String },
    #[error("times must be sorted, non-negative and non-empty")]
    BadTimeGrid,
    #[error("imaginary residual {value:.3e} on {what} exceeds 1e-6")]
    ImaginaryResidual { what: &'static str, value: f64 },
    #[error("trace drift {err:.3e} at t = {time:.6} exceeds {TRACE_DRIFT_ABORT:.1e}")]
    TraceDrift { time: f64, err: f64 },
    #[error("Fock tail mass {mass:.3e} at t = {time:.6} exceeds {TAIL_MASS_LIMIT:.1e}; raise the cutoff")]
    TailMassBreach { time: f64, mass: f64 },
    #[error("positivity violation at t = {time:.6}: min eigenvalue {min_eig:.3e} < {POSITIVITY_FLOOR:.1e}")]
    PositivityViolation { time: f64, min_eig: f64 },
    #[error("integrator step underflow: dt = {dt:.3e}")]
    StepUnderflow { dt: f64 },
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Joint state on the qubit ⊗ oscillator space, validated on construction:
/// Hermitian within 1e-9, unit trace within 1e-9, min eigenvalue ≥ −1e-8.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self, DynamicsError> {
        let d = dims.0 * dims.1;
        if !matrix.is_square() || matrix.rows() != d {
            return Err(DynamicsError::InvalidState {
                context: format!("matrix is {}x{}, dims say {}x{}", matrix.rows(), matrix.cols(), d, d),
            });
        }
        if !matrix.is_finite() {
            return Err(DynamicsError::InvalidState { context: "non-finite entries".into() });
        }
        let herm = matrix.hermiticity_residual();
        if herm > STATE_HERMITICITY_TOL {
            return Err(DynamicsError::InvalidState {
                context: format!("hermiticity residual {herm:.3e}"),
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(DynamicsError::InvalidState { context: format!("trace {tr}") });
        }
        if !is_positive_within(&matrix, -POSITIVITY_FLOOR) {
            let min_eig = min_eigenvalue(&matrix.symmetrize())?;
            if min_eig < POSITIVITY_FLOOR {
                return Err(DynamicsError::InvalidState {
                    context: format!("min eigenvalue {min_eig:.3e}"),
                });
            }
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

/// Observable series along a time grid, plus per-point health numbers.
/// `cq` and `cm` are the Euclidean norms of (sx, sy) and (xm, pm).
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub xm: Vec<f64>,
    pub pm: Vec<f64>,
    pub cq: Vec<f64>,
    pub cm: Vec<f64>,
    pub trace_err: Vec<f64>,
    pub tail_mass: Vec<f64>,
    pub diagnostics: TrajectoryDiagnostics,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TrajectoryDiagnostics {
    pub max_trace_err: f64,
    pub max_hermiticity_residual: f64,
    pub max_tail_mass: f64,
    /// Cholesky positivity probe passed at every stored point.
    pub positivity_ok: bool,
    /// Exact smallest eigenvalue over a thinned subset of stored points.
    pub min_eigenvalue: f64,
    /// Step halvings performed before grid convergence (Lindblad only).
    pub step_halvings: u32,
    /// Observable change under the last step halving.
    pub grid_delta: f64,
    pub grid_converged: bool,
    /// Integrator steps per fast period actually used.
    pub steps_per_period: f64,
}

impl Default for TrajectoryDiagnostics {
    fn default() -> Self {
        Self {
            max_trace_err: 0.0,
            max_hermiticity_residual: 0.0,
            max_tail_mass: 0.0,
            positivity_ok: true,
            min_eigenvalue: 0.0,
            step_halvings: 0,
            grid_delta: 0.0,
            grid_converged: true,
            steps_per_period: 0.0,
        }
    }
}

impl Trajectory {
    /// Largest pointwise difference over the six observable series.
    pub fn max_observable_diff(&self, other: &Trajectory) -> f64 {
        let pairs = [
            (&self.sx, &other.sx),
            (&self.sy, &other.sy),
            (&self.xm, &other.xm),
            (&self.pm, &other.pm),
            (&self.cq, &other.cq),
            (&self.cm, &other.cm),
        ];
        let mut worst = 0.0f64;
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// Peak of a coherence series: grid maximum value and the earliest time
/// attaining it.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CoherencePeak {
    pub value: f64,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeakObservable {
    Cq,
    Cm,
}

/// l1-norm qubit coherence from the Bloch-plane components.
pub fn coherence(sx: f64, sy: f64) -> f64 {
    sx.hypot(sy)
}

/// Mean phase-space displacement of the oscillator.
pub fn displacement(xm: f64, pm: f64) -> f64 {
    xm.hypot(pm)
}

/// Fixed operators used to read out a trajectory.
struct ObservableSet {
    sx: ComplexMatrix,
    sy: ComplexMatrix,
    xm: ComplexMatrix,
    pm: ComplexMatrix,
    /// joint-space diagonal indices of the top Fock levels
    tail_indices: Vec<usize>,
}

impl ObservableSet {
    fn new(dims: (usize, usize)) -> Result<Self, DynamicsError> {
        let (dq, dm) = dims;
        assert_eq!(dq, 2, "qubit dimension must be 2");
        let cutoff = FockCutoff { n_max: dm - 1 };
        let i_q = ComplexMatrix::identity(dq);
        let i_m = ComplexMatrix::identity(dm);
        let (x, p) = quadratures(cutoff);
        // top three Fock levels; never the whole ladder on tiny spaces
        let tail_levels = 3.min(dm.saturating_sub(1)).max(1);
        let mut tail_indices = Vec::new();
        for q in 0..dq {
            for k in (dm - tail_levels)..dm {
                tail_indices.push((q * dm + k) * (dq * dm) + (q * dm + k));
            }
        }
        Ok(Self {
            sx: kron(&pauli(PauliAxis::X), &i_m)?,
            sy: kron(&pauli(PauliAxis::Y), &i_m)?,
            xm: kron(&i_q, &x)?,
            pm: kron(&i_q, &p)?,
            tail_indices,
        })
    }

    fn real_expectation(
        &self,
        rho: &ComplexMatrix,
        op: &ComplexMatrix,
        what: &'static str,
    ) -> Result<f64, DynamicsError> {
        let z = rho.trace_product(op);
        if z.im.abs() > 1e-6 {
            return Err(DynamicsError::ImaginaryResidual { what, value: z.im.abs() });
        }
        Ok(z.re)
    }

    fn tail_mass(&self, rho: &ComplexMatrix) -> f64 {
        self.tail_indices.iter().map(|&i| rho.as_slice()[i].re).sum()
    }
}

/// Expectation values (⟨σx⟩, ⟨σy⟩, ⟨X_m⟩, ⟨P_m⟩) of a state.
pub fn observables(rho: &DensityMatrix) -> Result<(f64, f64, f64, f64), DynamicsError> {
    let set = ObservableSet::new(rho.dims())?;
    let m = rho.matrix();
    Ok((
        set.real_expectation(m, &set.sx, "<sigma_x>")?,
        set.real_expectation(m, &set.sy, "<sigma_y>")?,
        set.real_expectation(m, &set.xm, "<X_m>")?,
        set.real_expectation(m, &set.pm, "<P_m>")?,
    ))
}

fn validate_times(times: &[f64]) -> Result<(), DynamicsError> {
    if times.is_empty() || times[0] < 0.0 {
        return Err(DynamicsError::BadTimeGrid);
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::BadTimeGrid);
    }
    Ok(())
}

/// Accumulates per-sample observables and health checks.
struct Recorder {
    traj: Trajectory,
    set: ObservableSet,
    /// exact min-eigenvalue checks are thinned to roughly this many points
    eig_stride: usize,
    sample_index: usize,
    min_eig_seen: f64,
}

impl Recorder {
    fn new(dims: (usize, usize), n_samples: usize) -> Result<Self, DynamicsError> {
        Ok(Self {
            traj: Trajectory::default(),
            set: ObservableSet::new(dims)?,
            eig_stride: (n_samples / 16).max(1),
            sample_index: 0,
            min_eig_seen: f64::INFINITY,
        })
    }

    fn record(&mut self, t: f64, rho: &ComplexMatrix) -> Result<(), DynamicsError> {
        let sx = self.set.real_expectation(rho, &self.set.sx, "<sigma_x>")?;
        let sy = self.set.real_expectation(rho, &self.set.sy, "<sigma_y>")?;
        let xm = self.set.real_expectation(rho, &self.set.xm, "<X_m>")?;
        let pm = self.set.real_expectation(rho, &self.set.pm, "<P_m>")?;

        let tr = rho.trace();
        let trace_err = (tr.re - 1.0).hypot(tr.im);
        if trace_err > TRACE_DRIFT_ABORT {
            return Err(DynamicsError::TraceDrift { time: t, err: trace_err });
        }
        let tail = self.set.tail_mass(rho);
        if tail > TAIL_MASS_LIMIT {
            return Err(DynamicsError::TailMassBreach { time: t, mass: tail });
        }
        let herm = rho.hermiticity_residual();

        if !is_positive_within(rho, -POSITIVITY_FLOOR) {
            let min_eig = min_eigenvalue(&rho.symmetrize())?;
            if min_eig < POSITIVITY_FLOOR {
                return Err(DynamicsError::PositivityViolation { time: t, min_eig });
            }
            self.min_eig_seen = self.min_eig_seen.min(min_eig);
        } else if self.sample_index % self.eig_stride == 0 {
            let min_eig = min_eigenvalue(&rho.symmetrize())?;
            if min_eig < POSITIVITY_FLOOR {
                return Err(DynamicsError::PositivityViolation { time: t, min_eig });
            }
            self.min_eig_seen = self.min_eig_seen.min(min_eig);
        }

        let cq = coherence(sx, sy);
        if cq > 1.0 + 1e-9 {
            return Err(DynamicsError::InvalidState {
                context: format!("C_q = {cq} > 1 at t = {t}"),
            });
        }
        let d = &mut self.traj;
        d.times.push(t);
        d.sx.push(sx);
        d.sy.push(sy);
        d.xm.push(xm);
        d.pm.push(pm);
        d.cq.push(cq);
        d.cm.push(displacement(xm, pm));
        d.trace_err.push(trace_err);
        d.tail_mass.push(tail);
        d.diagnostics.max_trace_err = d.diagnostics.max_trace_err.max(trace_err);
        d.diagnostics.max_hermiticity_residual = d.diagnostics.max_hermiticity_residual.max(herm);
        d.diagnostics.max_tail_mass = d.diagnostics.max_tail_mass.max(tail);
        self.sample_index += 1;
        Ok(())
    }

    fn finish(mut self) -> Trajectory {
        if self.min_eig_seen.is_finite() {
            self.traj.diagnostics.min_eigenvalue = self.min_eig_seen;
        }
        self.traj
    }
}

/// Common interface of the two backends, mainly so peaks can be refined on a
/// locally denser grid regardless of how states are produced.
pub trait Evolution {
    fn trajectory(&self, times: &[f64]) -> Result<Trajectory, DynamicsError>;
}

/// Exact unitary propagation via the spectral decomposition of H.
pub struct UnitaryEvolution {
    eigen: HermitianEigen,
    /// ρ(0) rotated to the eigenbasis: W = V† ρ(0) V
    rho0_eigenbasis: ComplexMatrix,
    dims: (usize, usize),
}

impl UnitaryEvolution {
    pub fn new(h: &ComplexMatrix, rho0: &DensityMatrix) -> Result<Self, DynamicsError> {
        let eigen = hermitian_eigen(h)?;
        let v_dag = eigen.eigenvectors.dagger();
        let w = matmul(&matmul(&v_dag, rho0.matrix()), &eigen.eigenvectors);
        Ok(Self { eigen, rho0_eigenbasis: w, dims: rho0.dims() })
    }

    /// ρ(t) in the original product basis.
    pub fn state_at(&self, t: f64) -> ComplexMatrix {
        let d = self.eigen.eigenvalues.len();
        let lam = &self.eigen.eigenvalues;
        let phased = ComplexMatrix::from_fn(d, d, |j, k| {
            self.rho0_eigenbasis[(j, k)] * C64::from_polar(1.0, -(lam[j] - lam[k]) * t)
        });
        let v = &self.eigen.eigenvectors;
        matmul(&matmul(v, &phased), &v.dagger())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

impl Evolution for UnitaryEvolution {
    fn trajectory(&self, times: &[f64]) -> Result<Trajectory, DynamicsError> {
        validate_times(times)?;
        let mut rec = Recorder::new(self.dims, times.len())?;
        for &t in times {
            let rho = self.state_at(t);
            rec.record(t, &rho)?;
        }
        Ok(rec.finish())
    }
}

/// Spectral-propagator trajectory of a (Hermitian) Hamiltonian.
pub fn evolve_unitary(
    h: &ComplexMatrix,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    UnitaryEvolution::new(h, rho0)?.trajectory(times)
}

/// Integrator controls for [`evolve_lindblad_with`].
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LindbladOptions {
    /// Nominal steps per period of the fastest frequency max(ω_q, ω_m, ω_q+ω_m).
    pub steps_per_period: f64,
    /// Keep halving the step until observables move < `grid_tol`, at most this many times.
    pub max_halvings: u32,
    pub grid_tol: f64,
    /// Disable to integrate once at the nominal step (long-horizon runs).
    pub auto_halve: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { steps_per_period: 400.0, max_halvings: 3, grid_tol: 1e-8, auto_halve: true }
    }
}

struct PreparedChannel {
    op: ComplexMatrix,
    op_dag: ComplexMatrix,
    /// O†O, Hermitian
    dag_op: ComplexMatrix,
    rate: f64,
}

/// Master-equation right-hand side with scratch buffers.
struct LindbladRhs {
    h: ComplexMatrix,
    channels: Vec<PreparedChannel>,
    t1: ComplexMatrix,
    t2: ComplexMatrix,
}

impl LindbladRhs {
    fn new(p: &SystemParams) -> Result<Self, DynamicsError> {
        let h = hamiltonian(p)?;
        let channels = collapse_channels(p)?
            .into_iter()
            .map(|c| {
                let op_dag = c.operator.dagger();
                let dag_op = matmul(&op_dag, &c.operator);
                PreparedChannel { op: c.operator, op_dag, dag_op, rate: c.rate }
            })
            .collect();
        let d = 2 * p.cutoff.dim();
        Ok(Self { h, channels, t1: ComplexMatrix::zeros(d, d), t2: ComplexMatrix::zeros(d, d) })
    }

    fn dim(&self) -> usize {
        self.h.rows()
    }

    /// out = −i[H,ρ] + Σ (γ/2)(2OρO† − O†Oρ − ρO†O).
    ///
    /// ρ is Hermitian along the whole integration, so [H,ρ] = Hρ − (Hρ)† and
    /// ρ·O†O = (O†O·ρ)†, which halves the number of matrix products.
    fn eval_into(&mut self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let d = self.dim();
        matmul_into(&self.h, rho, &mut self.t1);
        for i in 0..d {
            for j in 0..d {
                let k_ij = self.t1[(i, j)];
                let k_ji = self.t1[(j, i)];
                // −i(K − K†) entrywise
                out[(i, j)] = C64::new(0.0, -1.0) * k_ij + C64::new(0.0, 1.0) * k_ji.conj();
            }
        }
        for c in 0..self.channels.len() {
            let rate = self.channels[c].rate;
            // t2 = O ρ O†
            matmul_into(&self.channels[c].op, rho, &mut self.t1);
            matmul_into(&self.t1, &self.channels[c].op_dag, &mut self.t2);
            out.add_scaled(&self.t2, C64::new(rate, 0.0));
            // t1 = (O†O) ρ; subtract (γ/2)(t1 + t1†)
            matmul_into(&self.channels[c].dag_op, rho, &mut self.t1);
            let half_rate = 0.5 * rate;
            for i in 0..d {
                for j in 0..d {
                    let m_ij = self.t1[(i, j)];
                    let m_ji = self.t1[(j, i)];
                    out[(i, j)] -= (m_ij + m_ji.conj()) * half_rate;
                }
            }
        }
    }
}

fn fastest_frequency(p: &SystemParams) -> f64 {
    p.omega_q.max(p.omega_m).max(p.omega_q + p.omega_m)
}

/// One full RK4 pass over the sample grid at a fixed nominal step.
fn integrate_once(
    rhs: &mut LindbladRhs,
    rho0: &ComplexMatrix,
    dims: (usize, usize),
    times: &[f64],
    dt_nominal: f64,
) -> Result<Trajectory, DynamicsError> {
    if dt_nominal < 1e-12 {
        return Err(DynamicsError::StepUnderflow { dt: dt_nominal });
    }
    let d = rhs.dim();
    let mut rho = rho0.clone();
    let mut rec = Recorder::new(dims, times.len())?;

    let mut k1 = ComplexMatrix::zeros(d, d);
    let mut k2 = ComplexMatrix::zeros(d, d);
    let mut k3 = ComplexMatrix::zeros(d, d);
    let mut k4 = ComplexMatrix::zeros(d, d);
    let mut stage = ComplexMatrix::zeros(d, d);

    let mut t_now = 0.0f64;
    for &t_target in times {
        let gap = t_target - t_now;
        if gap > 0.0 {
            let n_steps = (gap / dt_nominal).ceil().max(1.0) as usize;
            let dt = gap / n_steps as f64;
            for _ in 0..n_steps {
                rhs.eval_into(&rho, &mut k1);
                stage.clone_from(&rho);
                stage.add_scaled(&k1, C64::new(dt / 2.0, 0.0));
                rhs.eval_into(&stage, &mut k2);
                stage.clone_from(&rho);
                stage.add_scaled(&k2, C64::new(dt / 2.0, 0.0));
                rhs.eval_into(&stage, &mut k3);
                stage.clone_from(&rho);
                stage.add_scaled(&k3, C64::new(dt, 0.0));
                rhs.eval_into(&stage, &mut k4);
                rho.add_scaled(&k1, C64::new(dt / 6.0, 0.0));
                rho.add_scaled(&k2, C64::new(dt / 3.0, 0.0));
                rho.add_scaled(&k3, C64::new(dt / 3.0, 0.0));
                rho.add_scaled(&k4, C64::new(dt / 6.0, 0.0));
            }
            t_now = t_target;
        }
        rec.record(t_target, &rho)?;
    }
    Ok(rec.finish())
}

/// Lindblad trajectory with the default integrator settings.
pub fn evolve_lindblad(
    p: &SystemParams,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    evolve_lindblad_with(p, rho0, times, &LindbladOptions::default())
}

/// Lindblad trajectory with explicit integrator controls.
pub fn evolve_lindblad_with(
    p: &SystemParams,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &LindbladOptions,
) -> Result<Trajectory, DynamicsError> {
    validate_times(times)?;
    p.validate()?;
    let mut rhs = LindbladRhs::new(p)?;
    if rho0.matrix().rows() != rhs.dim() {
        return Err(DynamicsError::InvalidState {
            context: format!("state dim {} vs params dim {}", rho0.matrix().rows(), rhs.dim()),
        });
    }
    let period = 2.0 * std::f64::consts::PI / fastest_frequency(p);
    let mut steps_per_period = opts.steps_per_period;
    let mut current =
        integrate_once(&mut rhs, rho0.matrix(), rho0.dims(), times, period / steps_per_period)?;
    current.diagnostics.steps_per_period = steps_per_period;

    if !opts.auto_halve {
        current.diagnostics.grid_converged = false;
        current.diagnostics.grid_delta = f64::NAN;
        return Ok(current);
    }

    let mut halvings = 0u32;
    loop {
        steps_per_period *= 2.0;
        let finer = integrate_once(
            &mut rhs,
            rho0.matrix(),
            rho0.dims(),
            times,
            period / steps_per_period,
        )?;
        let delta = current.max_observable_diff(&finer);
        current = finer;
        current.diagnostics.steps_per_period = steps_per_period;
        current.diagnostics.step_halvings = halvings + 1;
        current.diagnostics.grid_delta = delta;
        if delta < opts.grid_tol {
            current.diagnostics.grid_converged = true;
            return Ok(current);
        }
        halvings += 1;
        if halvings > opts.max_halvings {
            current.diagnostics.grid_converged = false;
            return Ok(current);
        }
    }
}

/// Grid-only peak: maximum value, earliest time attaining it.
pub fn peak_on_grid(traj: &Trajectory, which: PeakObservable) -> CoherencePeak {
    let series = match which {
        PeakObservable::Cq => &traj.cq,
        PeakObservable::Cm => &traj.cm,
    };
    let mut best = CoherencePeak { value: f64::NEG_INFINITY, time: 0.0 };
    for (&t, &v) in traj.times.iter().zip(series.iter()) {
        if v > best.value {
            best = CoherencePeak { value: v, time: t };
        }
    }
    best
}

/// Peak with one refinement pass: the evolution is re-evaluated on a 10×
/// finer grid around the coarse maximum (no interpolation), and the earliest
/// maximum of the combined data wins.
pub fn find_peak(
    evolution: &dyn Evolution,
    coarse: &Trajectory,
    which: PeakObservable,
) -> Result<CoherencePeak, DynamicsError> {
    let n = coarse.times.len();
    if n == 0 {
        return Err(DynamicsError::BadTimeGrid);
    }
    let coarse_peak = peak_on_grid(coarse, which);
    if n == 1 {
        return Ok(coarse_peak);
    }
    let series = match which {
        PeakObservable::Cq => &coarse.cq,
        PeakObservable::Cm => &coarse.cm,
    };
    let i_star = series
        .iter()
        .position(|&v| v == coarse_peak.value)
        .expect("peak value present in its own series");
    let lo = if i_star > 0 { coarse.times[i_star - 1] } else { coarse.times[0] };
    let hi = if i_star + 1 < n { coarse.times[i_star + 1] } else { coarse.times[n - 1] };
    if hi <= lo {
        return Ok(coarse_peak);
    }
    let fine_n = 21; // 10x the coarse density over the two bracketing gaps
    let fine_times: Vec<f64> =
        (0..fine_n).map(|i| lo + (hi - lo) * i as f64 / (fine_n - 1) as f64).collect();
    let fine = evolution.trajectory(&fine_times)?;
    let fine_peak = peak_on_grid(&fine, which);
    // earliest-time tie-break on the combined data
    if fine_peak.value > coarse_peak.value
        || (fine_peak.value == coarse_peak.value && fine_peak.time < coarse_peak.time)
    {
        Ok(fine_peak)
    } else {
        Ok(coarse_peak)
    }
}

/// Lindblad backend wrapper implementing [`Evolution`] for peak refinement.
pub struct LindbladEvolution<'a> {
    pub params: &'a SystemParams,
    pub rho0: &'a DensityMatrix,
    pub options: LindbladOptions,
}

impl Evolution for LindbladEvolution<'_> {
    fn trajectory(&self, times: &[f64]) -> Result<Trajectory, DynamicsError> {
        evolve_lindblad_with(self.params, self.rho0, times, &self.options)
    }
}

/// Evenly spaced sample grid over [0, horizon].
pub fn time_grid(horizon: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2 && horizon > 0.0);
    (0..samples).map(|i| horizon * i as f64 / (samples - 1) as f64).collect()
}
