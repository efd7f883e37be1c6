//! Hamiltonian and target in, decoupling scheme out.

use num_rational::BigRational;
use num_traits::One;

use crate::hamiltonian::{check_hermitian, target_ratio_vector, HamiltonianSpec, RatioEntry, RatioVector, TargetError};
use crate::linear_system::{
    particular_solution, rationalize, shift_nonnegative, SolutionVector, SystemError, DEFAULT_MAX_DENOMINATOR,
};
use crate::lp::{minimize_scaling, LpError, LpStats};
use crate::numeric::Coefficient;
use crate::pauli::PauliString;
use crate::scheme::{identity_scheme, materialize, DecouplingScheme, OrderingPolicy, SchemeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Minimal scaling factor by linear programming.
    #[default]
    Lp,
    /// Closed-form solution shifted to be non-negative.
    Particular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub max_denominator: u64,
    pub ordering: OrderingPolicy,
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Lp,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            ordering: OrderingPolicy::Lexicographic,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("{which} is not Hermitian at {label}: {reason}")]
    NotHermitian { which: &'static str, label: String, reason: String },
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

impl SolveError {
    /// True when the input is well formed but no scheme reaches the target.
    pub fn is_unsolvable(&self) -> bool {
        matches!(
            self,
            SolveError::Target(TargetError::Unreachable(_) | TargetError::EnvironmentCoupled(_))
                | SolveError::Lp(LpError::Infeasible(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub scheme: DecouplingScheme,
    pub ratio: RatioVector,
    /// Scaling factor of the solution before rounding.
    pub solution_scaling: f64,
    pub rounding_error: f64,
    pub exact: bool,
    pub lp_stats: Option<LpStats>,
}

fn ensure_hermitian(which: &'static str, spec: &HamiltonianSpec) -> Result<(), SolveError> {
    let report = check_hermitian(spec);
    match report.violation {
        Some((label, reason)) if !report.passed => {
            Err(SolveError::NotHermitian { which, label: label.file_token(), reason })
        }
        _ => Ok(()),
    }
}

fn keeps_everything(rv: &RatioVector) -> bool {
    rv.entries.iter().all(|e| match e.value.exact_real() {
        Some(x) => x.is_one(),
        None => e.value.value.re == 1.0 && e.value.value.im == 0.0,
    })
}

fn with_identity_row(mut ratio: RatioVector) -> RatioVector {
    ratio.entries.insert(
        0,
        RatioEntry {
            label: PauliString::identity(ratio.d, ratio.n_sites),
            value: Coefficient::one(),
            env_coupled: false,
        },
    );
    ratio
}

/// Computes a scheme implementing `target` from `h`.
pub fn solve(h: &HamiltonianSpec, target: &HamiltonianSpec, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    ensure_hermitian("Hamiltonian", h)?;
    ensure_hermitian("target", target)?;
    let ratio = target_ratio_vector(h, target)?;
    if keeps_everything(&ratio) {
        return Ok(SolveOutcome {
            scheme: identity_scheme(h.dim(), h.n_sites()),
            ratio,
            solution_scaling: 1.0,
            rounding_error: 0.0,
            exact: true,
            lp_stats: None,
        });
    }
    // a target of zero fixes no scale; pin Σ e = 1 through the identity row
    let ratio = if ratio.entries.iter().all(|e| e.value.is_zero()) { with_identity_row(ratio) } else { ratio };
    let (solution, lp_stats): (SolutionVector, Option<LpStats>) = match options.method {
        Method::Lp => {
            let (e, stats) = minimize_scaling(&ratio, options.verbose)?;
            (e, Some(stats))
        }
        Method::Particular => (shift_nonnegative(&particular_solution(&ratio)?), None),
    };
    let counts = rationalize(&solution, options.max_denominator)?;
    let rounding_error = counts.rounding_error;
    let scheme = materialize(&counts, &options.ordering)?;
    Ok(SolveOutcome {
        scheme,
        solution_scaling: solution.scaling(),
        exact: solution.is_exact() && rounding_error == 0.0,
        rounding_error,
        ratio,
        lp_stats,
    })
}

/// Scaling factor as an exact fraction, for display.
pub fn scaling_text(scaling: &BigRational) -> String {
    crate::numeric::render_rational(scaling)
}
