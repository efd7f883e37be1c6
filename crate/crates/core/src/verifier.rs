//! First-order check of a scheme: the average `(1/m) Σ g_i† H g_i` must equal
//! `H_id / D`.
//!
//! The symbolic route multiplies every coefficient by the phase sum
//! `(1/m) Σ_j c_j ω^{a_kj}`; the dense route conjugates explicit matrices.
//! Qubit problems with exact data are evaluated in rationals, so a correct
//! scheme shows a deviation of exactly zero.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::hamiltonian::HamiltonianSpec;
use crate::linear_system::system_row;
use crate::numeric::to_f64;
use crate::pauli::PauliString;
use crate::scheme::DecouplingScheme;

/// Default tolerance on the floating path.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Largest system dimension `d^N` accepted by the dense oracle.
pub const ORACLE_SYSTEM_CAP: usize = 256;
/// Largest total (system ⊗ dummy environment) dimension of the dense oracle.
pub const ORACLE_TOTAL_CAP: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("scheme and Hamiltonian disagree on dimension or site count")]
    ShapeMismatch,
    #[error("dense oracle dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
}

/// Averaged coefficient of one Hamiltonian term.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAverage {
    pub label: PauliString,
    pub env_coupled: bool,
    pub mu: Complex64,
    /// `μ_k (1/m) Σ_j c_j ω^{a_kj}`.
    pub average: Complex64,
    pub exact_average: Option<BigRational>,
}

fn check_shape(h: &HamiltonianSpec, scheme: &DecouplingScheme) -> Result<(), VerifyError> {
    if h.dim() != scheme.d || h.n_sites() != scheme.n_sites {
        return Err(VerifyError::ShapeMismatch);
    }
    Ok(())
}

/// Symbolic first-order average of every term of `h` under `scheme`.
pub fn first_order_average(h: &HamiltonianSpec, scheme: &DecouplingScheme) -> Result<Vec<LabelAverage>, VerifyError> {
    check_shape(h, scheme)?;
    let m = scheme.counts.m as f64;
    let m_exact = BigRational::from_integer(scheme.counts.m.into());
    Ok(h.terms()
        .map(|term| {
            let row = system_row(&term.label);
            let mut phase_sum = Complex64::new(0.0, 0.0);
            let mut sign_sum: i64 = 0;
            for (g, c) in &scheme.counts.counts {
                let col = g.index();
                phase_sum += row.value(col) * (*c as f64);
                if h.dim() == 2 {
                    sign_sum += row.sign(col) * *c as i64;
                }
            }
            let exact_average = match (h.dim(), term.coeff.exact_real()) {
                (2, Some(mu)) => Some(mu * BigRational::from_integer(sign_sum.into()) / &m_exact),
                _ => None,
            };
            let average = match &exact_average {
                Some(a) => Complex64::new(to_f64(a), 0.0),
                None => term.coeff.value * phase_sum / m,
            };
            LabelAverage {
                label: term.label.clone(),
                env_coupled: term.env_coupled,
                mu: term.coeff.value,
                average,
                exact_average,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelReport {
    pub label: PauliString,
    pub env_coupled: bool,
    /// `ν_k` (zero for environment-coupled and suppressed labels).
    pub target: Complex64,
    /// `D · average_k`.
    pub achieved: Complex64,
    /// `|D·avg − ν|` for system labels, `D·|avg|` for environment labels.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageReport {
    pub scaling: f64,
    pub m: u64,
    pub labels: Vec<LabelReport>,
    pub max_system_deviation: f64,
    pub max_env_residual: f64,
    pub tolerance: f64,
    /// True when every deviation was computed in exact arithmetic.
    pub exact: bool,
    pub passed: bool,
}

/// Checks `D · (1/m) Σ g_i† H g_i = H_id` term by term.
pub fn check_decoupling(
    h: &HamiltonianSpec,
    target: &HamiltonianSpec,
    scheme: &DecouplingScheme,
    tolerance: f64,
) -> Result<AverageReport, VerifyError> {
    check_shape(h, scheme)?;
    if target.dim() != h.dim() || target.n_sites() != h.n_sites() {
        return Err(VerifyError::ShapeMismatch);
    }
    let averages = first_order_average(h, scheme)?;
    let scaling = scheme.scaling_f64();
    let mut labels = Vec::new();
    let mut exact = true;
    for avg in &averages {
        let nu = target.get(&avg.label).filter(|_| !avg.env_coupled);
        let nu_value = nu.map_or(Complex64::new(0.0, 0.0), |t| t.coeff.value);
        let exact_dev = match (&avg.exact_average, nu.map(|t| t.coeff.exact_real())) {
            (Some(a), None) => Some((&scheme.scaling * a).abs()),
            (Some(a), Some(Some(v))) => Some((&scheme.scaling * a - v).abs()),
            _ => None,
        };
        exact &= exact_dev.is_some();
        let achieved = avg.average * scaling;
        let deviation = match exact_dev {
            Some(dev) => to_f64(&dev),
            None => (achieved - nu_value).norm(),
        };
        labels.push(LabelReport {
            label: avg.label.clone(),
            env_coupled: avg.env_coupled,
            target: nu_value,
            achieved,
            deviation,
        });
    }
    for t in target.terms() {
        if h.get(&t.label).is_none() {
            exact &= t.coeff.exact.is_some();
            labels.push(LabelReport {
                label: t.label.clone(),
                env_coupled: false,
                target: t.coeff.value,
                achieved: Complex64::new(0.0, 0.0),
                deviation: t.coeff.value.norm(),
            });
        }
    }
    let max_system_deviation = labels.iter().filter(|l| !l.env_coupled).map(|l| l.deviation).fold(0.0, f64::max);
    let max_env_residual = labels.iter().filter(|l| l.env_coupled).map(|l| l.deviation).fold(0.0, f64::max);
    let passed = max_system_deviation <= tolerance && max_env_residual <= tolerance;
    Ok(AverageReport {
        scaling,
        m: scheme.counts.m,
        labels,
        max_system_deviation,
        max_env_residual,
        tolerance,
        exact,
        passed,
    })
}

fn render_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

impl AverageReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:<6} {:>24} {:>24} {:>12}", "label", "kind", "target", "achieved", "deviation");
        for l in &self.labels {
            let kind = if l.env_coupled { "env" } else { "system" };
            let _ = writeln!(
                out,
                "{:<12} {:<6} {:>24} {:>24} {:>12.3e}",
                l.label.file_token(),
                kind,
                render_complex(l.target),
                render_complex(l.achieved),
                l.deviation
            );
        }
        let _ = writeln!(
            out,
            "D = {}, m = {}, max system deviation = {:e}, max env residual = {:e}, tolerance = {:e}{}: {}",
            self.scaling,
            self.m,
            self.max_system_deviation,
            self.max_env_residual,
            self.tolerance,
            if self.exact { " (exact)" } else { "" },
            if self.passed { "PASS" } else { "FAIL" }
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,target,achieved,deviation\n");
        for l in &self.labels {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                l.label.file_token(),
                render_complex(l.target),
                render_complex(l.achieved),
                l.deviation
            );
        }
        out
    }
}

/// How environment-coupled terms enter a dense matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvMode {
    /// Drop environment-coupled terms.
    SystemOnly,
    /// Give every environment-coupled term its own two-level environment and
    /// couple it through `σ_1` there.
    DummyEnvironment,
}

/// A dense Hamiltonian on `system ⊗ environment`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel {
    pub matrix: DMatrix<Complex64>,
    pub system_dim: usize,
    pub env_dim: usize,
}

fn env_factor(slot: usize, n_env: usize) -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let sx = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let mut m = DMatrix::from_element(1, 1, one);
    for t in 0..n_env {
        m = if t == slot { m.kronecker(&sx) } else { m.kronecker(&DMatrix::identity(2, 2)) };
    }
    m
}

/// Builds `Σ μ_k B_k ⊗ E_k` densely; `B_k` follows the coefficient convention
/// of [`HamiltonianSpec`].
pub fn dense_hamiltonian(h: &HamiltonianSpec, mode: EnvMode) -> Result<DenseModel, VerifyError> {
    let system_dim = (h.dim() as usize).pow(h.n_sites() as u32);
    if system_dim > ORACLE_SYSTEM_CAP {
        return Err(VerifyError::DimensionCap { dim: system_dim, cap: ORACLE_SYSTEM_CAP });
    }
    let n_env = match mode {
        EnvMode::SystemOnly => 0,
        EnvMode::DummyEnvironment => h.terms().filter(|t| t.env_coupled).count(),
    };
    let env_dim = 1usize << n_env;
    if system_dim * env_dim > ORACLE_TOTAL_CAP {
        return Err(VerifyError::DimensionCap { dim: system_dim * env_dim, cap: ORACLE_TOTAL_CAP });
    }
    let mut matrix = DMatrix::zeros(system_dim * env_dim, system_dim * env_dim);
    let mut slot = 0;
    for term in h.terms() {
        let basis = term.label.hamiltonian_basis_dense() * term.coeff.value;
        if term.env_coupled {
            if mode == EnvMode::SystemOnly {
                continue;
            }
            matrix += basis.kronecker(&env_factor(slot, n_env));
            slot += 1;
        } else {
            matrix += basis.kronecker(&DMatrix::identity(env_dim, env_dim));
        }
    }
    Ok(DenseModel { matrix, system_dim, env_dim })
}

/// Dense `(1/m) Σ_i (g_i ⊗ 1)† H (g_i ⊗ 1)`.
pub fn dense_oracle_average(
    h: &HamiltonianSpec,
    scheme: &DecouplingScheme,
    mode: EnvMode,
) -> Result<DMatrix<Complex64>, VerifyError> {
    check_shape(h, scheme)?;
    let model = dense_hamiltonian(h, mode)?;
    let env_id = DMatrix::identity(model.env_dim, model.env_dim);
    let mut acc = DMatrix::zeros(model.matrix.nrows(), model.matrix.ncols());
    for g in &scheme.order {
        let gd = g.to_dense().kronecker(&env_id);
        acc += gd.adjoint() * &model.matrix * gd;
    }
    Ok(acc / Complex64::new(scheme.m() as f64, 0.0))
}

/// Dense matrix assembled from symbolic averages, in the layout of
/// [`dense_hamiltonian`].
pub fn symbolic_dense(
    h: &HamiltonianSpec,
    averages: &[LabelAverage],
    mode: EnvMode,
) -> Result<DMatrix<Complex64>, VerifyError> {
    let mut scaled = HamiltonianSpec::new(h.dim(), h.n_sites());
    for avg in averages {
        if avg.average.norm() == 0.0 {
            // keep the environment slot layout identical to `h`
            scaled.add_term(avg.label.clone(), crate::numeric::Coefficient::float(Complex64::new(0.0, 0.0)), avg.env_coupled);
        } else {
            scaled.add_term(avg.label.clone(), crate::numeric::Coefficient::float(avg.average), avg.env_coupled);
        }
    }
    Ok(dense_hamiltonian(&scaled, mode)?.matrix)
}

/// Largest entrywise difference between the symbolic and dense averages.
pub fn oracle_discrepancy(h: &HamiltonianSpec, scheme: &DecouplingScheme, mode: EnvMode) -> Result<f64, VerifyError> {
    let averages = first_order_average(h, scheme)?;
    let symbolic = symbolic_dense(h, &averages, mode)?;
    let oracle = dense_oracle_average(h, scheme, mode)?;
    Ok((symbolic - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// True when every averaged coefficient is zero.
pub fn all_suppressed(averages: &[LabelAverage]) -> bool {
    averages.iter().all(|a| match &a.exact_average {
        Some(x) => x.is_zero(),
        None => a.average.norm() <= DEFAULT_TOLERANCE,
    })
}
