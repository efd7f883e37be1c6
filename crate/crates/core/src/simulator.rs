//! Dense state-vector simulation of pulsed evolution and the reduced state
//! fidelity of the protected gate.
//!
//! One Hermitian eigendecomposition of the joint Hamiltonian serves every free
//! segment: `e^{-iHΔt}` is applied in the eigenbasis and the pulses act on the
//! system factor only.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::exec::Execution;
use crate::hamiltonian::HamiltonianSpec;
use crate::numeric::Coefficient;
use crate::pauli::PauliString;
use crate::scheme::DecouplingScheme;
use crate::verifier::{dense_hamiltonian, EnvMode, VerifyError};

/// Gate time of the √SWAP gate generated by the Heisenberg Hamiltonian.
pub const DEFAULT_TAU: f64 = PI / 8.0;
pub const DEFAULT_FOCK_DIM: usize = 8;
const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("Hamiltonian is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),
    #[error("state is not normalized (norm {0})")]
    Unnormalized(f64),
    #[error("state has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("number of scheme applications must be at least 1")]
    ZeroRepetitions,
    #[error("oscillator truncation must be at least 2, got {0}")]
    FockDim(usize),
    #[error("scheme acts on dimension {scheme}, model system has dimension {model}")]
    SchemeShape { scheme: usize, model: usize },
    #[error(transparent)]
    Model(#[from] VerifyError),
}

/// Heisenberg exchange `Σ_i σ_i ⊗ σ_i` on two qubits.
pub fn heisenberg() -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(4, 4);
    for digit in 1..=3 {
        let label = PauliString::from_qubit_digits(&[digit, digit]).expect("qubit digits");
        h += label.hamiltonian_basis_dense();
    }
    h
}

fn ladder(fock_dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `σ_+ = (σ_1 + iσ_2)/2 = |0⟩⟨1|`.
fn sigma_plus() -> DMatrix<Complex64> {
    let x = PauliString::from_qubit_digits(&[1]).expect("digit").hamiltonian_basis_dense();
    let y = PauliString::from_qubit_digits(&[2]).expect("digit").hamiltonian_basis_dense();
    (x + y * Complex64::new(0.0, 1.0)) * Complex64::new(0.5, 0.0)
}

fn kron_all(factors: &[&DMatrix<Complex64>]) -> DMatrix<Complex64> {
    factors.iter().fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, f| acc.kronecker(*f))
}

/// Two qubits, each coupled to its own truncated oscillator, on
/// `qubit_1 ⊗ qubit_2 ⊗ osc_a ⊗ osc_b`:
/// `H = H_int + λ(σ_+^(1) a + σ_-^(1) a† + σ_+^(2) b + σ_-^(2) b†)`.
pub fn build_oscillator_model(lambda: f64, fock_dim: usize) -> Result<DMatrix<Complex64>, SimulationError> {
    if fock_dim < 2 {
        return Err(SimulationError::FockDim(fock_dim));
    }
    let i2 = DMatrix::<Complex64>::identity(2, 2);
    let ib = DMatrix::<Complex64>::identity(fock_dim, fock_dim);
    let sp = sigma_plus();
    let sm = sp.adjoint();
    let a = ladder(fock_dim);
    let ad = a.adjoint();
    let mut h = heisenberg().kronecker(&DMatrix::identity(fock_dim * fock_dim, fock_dim * fock_dim));
    if lambda != 0.0 {
        let coupling = kron_all(&[&sp, &i2, &a, &ib])
            + kron_all(&[&sm, &i2, &ad, &ib])
            + kron_all(&[&i2, &sp, &ib, &a])
            + kron_all(&[&i2, &sm, &ib, &ad]);
        h += coupling * Complex64::new(lambda, 0.0);
    }
    Ok(h)
}

/// A joint system ⊗ environment Hamiltonian together with the ideal system
/// Hamiltonian it should implement.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub hamiltonian: DMatrix<Complex64>,
    pub ideal: DMatrix<Complex64>,
    pub system_dim: usize,
    pub env_dim: usize,
}

impl JointModel {
    pub fn oscillators(lambda: f64, fock_dim: usize) -> Result<Self, SimulationError> {
        Ok(Self {
            hamiltonian: build_oscillator_model(lambda, fock_dim)?,
            ideal: heisenberg(),
            system_dim: 4,
            env_dim: fock_dim * fock_dim,
        })
    }

    /// Model from specification files: system terms as given, environment
    /// terms scaled by `λ` and coupled to a two-level environment each.
    pub fn from_spec(h: &HamiltonianSpec, target: &HamiltonianSpec, lambda: f64) -> Result<Self, SimulationError> {
        let mut system = HamiltonianSpec::new(h.dim(), h.n_sites());
        let mut env = HamiltonianSpec::new(h.dim(), h.n_sites());
        for t in h.terms() {
            if t.env_coupled {
                env.add_term(t.label.clone(), Coefficient::float(t.coeff.value * lambda), true);
            } else {
                system.add_term(t.label.clone(), t.coeff.clone(), false);
            }
        }
        let env_model = dense_hamiltonian(&env, EnvMode::DummyEnvironment)?;
        let sys_model = dense_hamiltonian(&system, EnvMode::SystemOnly)?;
        let env_dim = env_model.env_dim;
        let hamiltonian = sys_model.matrix.kronecker(&DMatrix::identity(env_dim, env_dim)) + env_model.matrix;
        let ideal = dense_hamiltonian(target, EnvMode::SystemOnly)?.matrix;
        Ok(Self { hamiltonian, ideal, system_dim: sys_model.system_dim, env_dim })
    }

    pub fn dim(&self) -> usize {
        self.system_dim * self.env_dim
    }
}

/// Cached eigendecomposition `H = V diag(E) V†`.
#[derive(Debug, Clone)]
pub struct Propagator {
    vectors: DMatrix<Complex64>,
    values: DVector<f64>,
}

impl Propagator {
    pub fn new(h: &DMatrix<Complex64>) -> Result<Self, SimulationError> {
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(SimulationError::NonHermitian(dev));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(Self { vectors: eig.eigenvectors, values: eig.eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `e^{-iHt} ψ`.
    pub fn apply(&self, t: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (c, e) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }

    /// Dense `e^{-iHt}`.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        for (mut col, e) in scaled.column_iter_mut().zip(self.values.iter()) {
            col *= Complex64::from_polar(1.0, -e * t);
        }
        scaled * self.vectors.adjoint()
    }
}

/// `Δt = Dτ/(m·n)`.
pub fn pulse_interval(scheme: &DecouplingScheme, n: usize, tau: f64) -> f64 {
    scheme.scaling_f64() * tau / (scheme.m() as f64 * n as f64)
}

/// Applies `p ⊗ 1_env` to a joint state in place.
fn apply_system_operator(op: &DMatrix<Complex64>, env_dim: usize, psi: &mut DVector<Complex64>) {
    let s = op.nrows();
    let mut column = vec![Complex64::new(0.0, 0.0); s];
    for e in 0..env_dim {
        for (a, slot) in column.iter_mut().enumerate() {
            *slot = (0..s).map(|b| op[(a, b)] * psi[b * env_dim + e]).sum();
        }
        for (a, v) in column.iter().enumerate() {
            psi[a * env_dim + e] = *v;
        }
    }
}

fn check_scheme(scheme: &DecouplingScheme, system_dim: usize) -> Result<(), SimulationError> {
    let dim = (scheme.d as usize).pow(scheme.n_sites as u32);
    if dim != system_dim {
        return Err(SimulationError::SchemeShape { scheme: dim, model: system_dim });
    }
    Ok(())
}

/// Final joint state after `n` applications of the pulse sequence
/// `p_m e^{-iHΔt} ⋯ p_1 e^{-iHΔt} p_0`.
pub fn evolve_state(
    prop: &Propagator,
    scheme: &DecouplingScheme,
    n: usize,
    tau: f64,
    env_dim: usize,
    state: &DVector<Complex64>,
) -> Result<DVector<Complex64>, SimulationError> {
    evolve_state_observed(prop, scheme, n, tau, env_dim, state, |_| {})
}

/// [`evolve_state`] calling `observe` with the state after every pulse.
pub fn evolve_state_observed(
    prop: &Propagator,
    scheme: &DecouplingScheme,
    n: usize,
    tau: f64,
    env_dim: usize,
    state: &DVector<Complex64>,
    mut observe: impl FnMut(&DVector<Complex64>),
) -> Result<DVector<Complex64>, SimulationError> {
    if n == 0 {
        return Err(SimulationError::ZeroRepetitions);
    }
    check_scheme(scheme, prop.dim() / env_dim)?;
    if state.len() != prop.dim() {
        return Err(SimulationError::StateLength { expected: prop.dim(), found: state.len() });
    }
    let dt = pulse_interval(scheme, n, tau);
    let pulses: Vec<DMatrix<Complex64>> = scheme.pulses.iter().map(PauliString::to_dense).collect();
    let mut psi = state.clone();
    for _ in 0..n {
        apply_system_operator(&pulses[0], env_dim, &mut psi);
        observe(&psi);
        for p in &pulses[1..] {
            psi = prop.apply(dt, &psi);
            apply_system_operator(p, env_dim, &mut psi);
            observe(&psi);
        }
    }
    Ok(psi)
}

/// Dense unitary of `n` applications of the pulse sequence.
pub fn evolve_unitary(
    prop: &Propagator,
    scheme: &DecouplingScheme,
    n: usize,
    tau: f64,
    env_dim: usize,
) -> Result<DMatrix<Complex64>, SimulationError> {
    if n == 0 {
        return Err(SimulationError::ZeroRepetitions);
    }
    check_scheme(scheme, prop.dim() / env_dim)?;
    let env_id = DMatrix::identity(env_dim, env_dim);
    let free = prop.unitary(pulse_interval(scheme, n, tau));
    let pulses: Vec<DMatrix<Complex64>> = scheme.pulses.iter().map(|p| p.to_dense().kronecker(&env_id)).collect();
    let mut period = pulses[0].clone();
    for p in &pulses[1..] {
        period = p * &free * period;
    }
    let mut u = DMatrix::identity(prop.dim(), prop.dim());
    for _ in 0..n {
        u = &period * u;
    }
    Ok(u)
}

fn norm_check(v: &DVector<Complex64>) -> Result<(), SimulationError> {
    let norm = v.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(SimulationError::Unnormalized(norm));
    }
    Ok(())
}

/// Reduced state fidelity `⟨ψ_id| Tr_env |Φ⟩⟨Φ| |ψ_id⟩`.
pub fn fidelity(
    final_state: &DVector<Complex64>,
    ideal: &DVector<Complex64>,
    env_dim: usize,
) -> Result<f64, SimulationError> {
    norm_check(final_state)?;
    norm_check(ideal)?;
    let s = ideal.len();
    if final_state.len() != s * env_dim {
        return Err(SimulationError::StateLength { expected: s * env_dim, found: final_state.len() });
    }
    let f: f64 = (0..env_dim)
        .map(|e| (0..s).map(|a| ideal[a].conj() * final_state[a * env_dim + e]).sum::<Complex64>().norm_sqr())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `|k⟩` in dimension `dim`.
pub fn basis_state(dim: usize, k: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// `|ψ⟩ ⊗ |0⟩_env`.
pub fn with_ground_environment(psi: &DVector<Complex64>, env_dim: usize) -> DVector<Complex64> {
    psi.kronecker(&basis_state(env_dim, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub lambda: f64,
    pub tau: f64,
    pub n: usize,
    pub fock_dim: usize,
    pub initial_state: DVector<Complex64>,
    pub use_decoupling: bool,
}

impl SimulationConfig {
    /// Defaults for the two-qubit oscillator model: `τ = π/8`, `|01⟩`.
    pub fn new(lambda: f64, n: usize) -> Self {
        Self {
            lambda,
            tau: DEFAULT_TAU,
            n,
            fock_dim: DEFAULT_FOCK_DIM,
            initial_state: basis_state(4, 1),
            use_decoupling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityResult {
    pub lambda: f64,
    pub n: usize,
    pub dt: f64,
    pub fidelity: f64,
}

/// Fidelity of one run on a prepared model and propagator.
pub fn run_point(
    model: &JointModel,
    prop: &Propagator,
    scheme: Option<&DecouplingScheme>,
    n: usize,
    tau: f64,
    initial: &DVector<Complex64>,
) -> Result<(f64, f64), SimulationError> {
    if n == 0 {
        return Err(SimulationError::ZeroRepetitions);
    }
    if initial.len() != model.system_dim {
        return Err(SimulationError::StateLength { expected: model.system_dim, found: initial.len() });
    }
    norm_check(initial)?;
    let joint = with_ground_environment(initial, model.env_dim);
    let (dt, final_state) = match scheme {
        Some(s) => (pulse_interval(s, n, tau), evolve_state(prop, s, n, tau, model.env_dim, &joint)?),
        None => (tau, prop.apply(tau, &joint)),
    };
    let ideal_prop = Propagator::new(&model.ideal)?;
    let ideal = ideal_prop.apply(tau, initial);
    Ok((dt, fidelity(&final_state, &ideal, model.env_dim)?))
}

/// Single simulation of the two-qubit oscillator model.
pub fn simulate(config: &SimulationConfig, scheme: &DecouplingScheme) -> Result<FidelityResult, SimulationError> {
    let model = JointModel::oscillators(config.lambda, config.fock_dim)?;
    let prop = Propagator::new(&model.hamiltonian)?;
    let used = config.use_decoupling.then_some(scheme);
    let (dt, fidelity) = run_point(&model, &prop, used, config.n, config.tau, &config.initial_state)?;
    Ok(FidelityResult { lambda: config.lambda, n: config.n, dt, fidelity })
}

/// Physical model a sweep runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepModel {
    /// Two qubits with Heisenberg exchange, each coupled to an oscillator.
    Oscillators { fock_dim: usize },
    /// Model built from a Hamiltonian and target specification.
    Spec { hamiltonian: HamiltonianSpec, target: HamiltonianSpec },
}

impl SweepModel {
    pub fn build(&self, lambda: f64) -> Result<JointModel, SimulationError> {
        match self {
            SweepModel::Oscillators { fock_dim } => JointModel::oscillators(lambda, *fock_dim),
            SweepModel::Spec { hamiltonian, target } => JointModel::from_spec(hamiltonian, target, lambda),
        }
    }

    pub fn system_dim(&self) -> usize {
        match self {
            SweepModel::Oscillators { .. } => 4,
            SweepModel::Spec { hamiltonian, .. } => (hamiltonian.dim() as usize).pow(hamiltonian.n_sites() as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub lambdas: Vec<f64>,
    pub ns: Vec<usize>,
    pub tau: f64,
    pub initial_state: DVector<Complex64>,
}

impl SweepGrid {
    /// Grid with `τ = π/8` and initial system state `|0…01⟩`.
    pub fn new(lambdas: Vec<f64>, ns: Vec<usize>, system_dim: usize) -> Self {
        Self { lambdas, ns, tau: DEFAULT_TAU, initial_state: basis_state(system_dim, 1.min(system_dim - 1)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub n: usize,
    pub dt: f64,
    pub fidelity: f64,
    pub scheme_id: String,
}

/// One row per `(λ, n)` grid point, sorted by `λ` then `n`. `scheme = None`
/// runs the uncontrolled baseline `e^{-iHτ}`.
pub fn sweep(
    model: &SweepModel,
    scheme: Option<&DecouplingScheme>,
    scheme_id: &str,
    grid: &SweepGrid,
    execution: Execution,
) -> Result<Vec<SweepRow>, SimulationError> {
    if grid.ns.contains(&0) {
        return Err(SimulationError::ZeroRepetitions);
    }
    if let Some(s) = scheme {
        check_scheme(s, model.system_dim())?;
    }
    let mut lambdas = grid.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut ns = grid.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    if lambdas.is_empty() || ns.is_empty() {
        return Ok(Vec::new());
    }
    let prepared = execution.map(lambdas, |lambda| -> Result<_, SimulationError> {
        let joint = model.build(lambda)?;
        let prop = Propagator::new(&joint.hamiltonian)?;
        Ok((lambda, joint, prop))
    });
    let prepared = prepared.into_iter().collect::<Result<Vec<_>, _>>()?;
    let points: Vec<(usize, usize)> =
        (0..prepared.len()).flat_map(|i| ns.iter().map(move |&n| (i, n))).collect();
    let rows = execution.map(points, |(i, n)| -> Result<SweepRow, SimulationError> {
        let (lambda, joint, prop) = &prepared[i];
        let (dt, fidelity) = run_point(joint, prop, scheme, n, grid.tau, &grid.initial_state)?;
        Ok(SweepRow { lambda: *lambda, n, dt, fidelity, scheme_id: scheme_id.to_string() })
    });
    rows.into_iter().collect()
}

pub const CSV_HEADER: &str = "lambda,n,dt,fidelity,scheme_id";

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.lambda, r.n, r.dt, r.fidelity, r.scheme_id);
    }
    out
}
