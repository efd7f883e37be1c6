//! Minimal-scaling solutions of `A_K e = r, e ≥ 0` by a two-phase revised
//! simplex with Bland's rule.
//!
//! Qubit problems with rational targets pivot in exact rationals; the rest
//! pivot in `f64` with the tolerance in [`crate::numeric::FLOAT_PIVOT_TOL`].
//! Complex constraints are split into real and imaginary equations, keeping
//! only one row of every conjugate pair.

use num_rational::BigRational;
use num_traits::Zero;

use crate::hamiltonian::RatioVector;
use crate::linear_system::{column_count, system_row, SolutionVector, Weights, FLOAT_TOL};
use crate::numeric::LpScalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("the constraints are infeasible (phase-one objective {0:e})")]
    Infeasible(f64),
    #[error("the objective is unbounded below")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("imaginary target {0:e} on a real constraint row")]
    InconsistentImaginary(f64),
}

const ITERATION_LIMIT: usize = 200_000;

/// `min Σ x  s.t.  rows · x = rhs, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<T> {
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub n_vars: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Dual vector for the original (unflipped) rows; certifies optimality
    /// when `1 − yᵀA_j ≥ 0` for all `j` and `yᵀrhs = objective`.
    pub dual: Vec<T>,
    /// Basic variable of each row; indices `>= n_vars` are artificial.
    pub basis: Vec<usize>,
    pub iterations: usize,
    pub pivot_log: Vec<String>,
}

struct Tableau<'a, T> {
    problem: &'a LpProblem<T>,
    sign: Vec<bool>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    basis: Vec<usize>,
    iterations: usize,
    log: Option<Vec<String>>,
}

impl<'a, T: LpScalar> Tableau<'a, T> {
    fn new(problem: &'a LpProblem<T>, verbose: bool) -> Self {
        let m = problem.rows.len();
        let sign: Vec<bool> = problem.rhs.iter().map(|b| b.lp_is_negative()).collect();
        let xb = problem.rhs.iter().zip(&sign).map(|(b, &s)| if s { b.lp_neg() } else { b.clone() }).collect();
        let binv = (0..m)
            .map(|i| (0..m).map(|j| if i == j { T::lp_one() } else { T::lp_zero() }).collect())
            .collect();
        let basis = (0..m).map(|i| problem.n_vars + i).collect();
        Self { problem, sign, binv, xb, basis, iterations: 0, log: verbose.then(Vec::new) }
    }

    /// Column `j` of the row-normalized constraint matrix (artificials included).
    fn column(&self, j: usize) -> Vec<T> {
        let n = self.problem.n_vars;
        (0..self.problem.rows.len())
            .map(|i| {
                if j >= n {
                    if j - n == i {
                        T::lp_one()
                    } else {
                        T::lp_zero()
                    }
                } else if self.sign[i] {
                    self.problem.rows[i][j].lp_neg()
                } else {
                    self.problem.rows[i][j].clone()
                }
            })
            .collect()
    }

    fn binv_times(&self, col: &[T]) -> Vec<T> {
        self.binv
            .iter()
            .map(|row| row.iter().zip(col).fold(T::lp_zero(), |acc, (a, b)| acc.lp_add(&a.lp_mul(b))))
            .collect()
    }

    fn dual(&self, cost: &dyn Fn(usize) -> T) -> Vec<T> {
        let m = self.basis.len();
        (0..m)
            .map(|j| {
                (0..m).fold(T::lp_zero(), |acc, i| acc.lp_add(&cost(self.basis[i]).lp_mul(&self.binv[i][j])))
            })
            .collect()
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[T]) {
        let piv = u[row].clone();
        for v in self.binv[row].iter_mut() {
            *v = v.lp_div(&piv);
        }
        self.xb[row] = self.xb[row].lp_div(&piv);
        let pivot_row = self.binv[row].clone();
        let pivot_x = self.xb[row].clone();
        for (i, ui) in u.iter().enumerate().take(self.binv.len()) {
            if i == row || ui.lp_is_zero_value() {
                continue;
            }
            let f = ui.clone();
            for (v, p) in self.binv[i].iter_mut().zip(&pivot_row) {
                *v = v.lp_sub(&f.lp_mul(p));
            }
            self.xb[i] = self.xb[i].lp_sub(&f.lp_mul(&pivot_x));
        }
        if let Some(log) = self.log.as_mut() {
            log.push(format!(
                "iter {}: x{} enters, x{} leaves at row {}",
                self.iterations, entering, self.basis[row], row
            ));
        }
        self.basis[row] = entering;
        self.iterations += 1;
    }

    /// Runs simplex iterations over the allowed entering columns.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> T, allowed: usize) -> Result<(), LpError> {
        loop {
            if self.iterations >= ITERATION_LIMIT {
                return Err(LpError::IterationLimit(ITERATION_LIMIT));
            }
            let y = self.dual(cost);
            // Bland: lowest-index column with negative reduced cost
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let col = self.column(j);
                let yc = y.iter().zip(&col).fold(T::lp_zero(), |acc, (a, b)| acc.lp_add(&a.lp_mul(b)));
                if cost(j).lp_sub(&yc).lp_is_negative() {
                    entering = Some((j, col));
                    break;
                }
            }
            let Some((j, col)) = entering else { return Ok(()) };
            let u = self.binv_times(&col);
            let mut leave: Option<(usize, T)> = None;
            for (i, ui) in u.iter().enumerate() {
                if !ui.lp_is_positive() {
                    continue;
                }
                let ratio = self.xb[i].lp_div(ui);
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let smaller = ratio.lp_lt(&br) && !ratio.lp_sub(&br).lp_is_zero_value();
                        let tie = ratio.lp_sub(&br).lp_is_zero_value();
                        if smaller || (tie && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else { return Err(LpError::Unbounded) };
            self.pivot(row, j, &u);
        }
    }
}

/// Solves `min Σ x` subject to `rows · x = rhs`, `x ≥ 0`.
pub fn solve<T: LpScalar>(problem: &LpProblem<T>, verbose: bool) -> Result<LpSolution<T>, LpError> {
    let n = problem.n_vars;
    let m = problem.rows.len();
    let mut t = Tableau::new(problem, verbose);

    let phase_one = |j: usize| if j >= n { T::lp_one() } else { T::lp_zero() };
    t.optimize(&phase_one, n)?;
    let infeasibility = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .fold(T::lp_zero(), |acc, i| acc.lp_add(&t.xb[i]));
    if infeasibility.lp_is_positive() {
        return Err(LpError::Infeasible(infeasibility.lp_to_f64()));
    }
    // drive remaining (zero-valued) artificials out where a real column allows it
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        let replacement = (0..n)
            .filter(|j| !t.basis.contains(j))
            .map(|j| (j, t.binv_times(&t.column(j))))
            .find(|(_, u)| !u[i].lp_is_zero_value());
        if let Some((j, u)) = replacement {
            t.pivot(i, j, &u);
        }
    }

    let phase_two = |j: usize| if j >= n { T::lp_zero() } else { T::lp_one() };
    t.optimize(&phase_two, n)?;

    let mut x = vec![T::lp_zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.xb[i].clone();
        }
    }
    let objective = x.iter().fold(T::lp_zero(), |acc, v| acc.lp_add(v));
    let dual = t
        .dual(&phase_two)
        .into_iter()
        .zip(&t.sign)
        .map(|(y, &s)| if s { y.lp_neg() } else { y })
        .collect();
    Ok(LpSolution {
        x,
        objective,
        dual,
        basis: t.basis.clone(),
        iterations: t.iterations,
        pivot_log: t.log.unwrap_or_default(),
    })
}

/// Exact qubit problem: rows of `±1`, rational right-hand side.
pub fn exact_problem(rv: &RatioVector) -> Option<LpProblem<BigRational>> {
    if rv.d != 2 {
        return None;
    }
    let rhs: Vec<BigRational> = rv.entries.iter().map(|e| e.value.exact_real().cloned()).collect::<Option<_>>()?;
    let n_vars = column_count(rv.d, rv.n_sites);
    let rows = rv
        .labels()
        .map(|label| {
            let row = system_row(label);
            (0..n_vars)
                .map(|c| BigRational::from_integer(row.sign(c).into()))
                .collect()
        })
        .collect();
    Some(LpProblem { rows, rhs, n_vars })
}

/// Real-valued problem; complex rows become a real and an imaginary equation,
/// and only one label of every conjugate pair in `K` is kept.
pub fn float_problem(rv: &RatioVector) -> Result<LpProblem<f64>, LpError> {
    let n_vars = column_count(rv.d, rv.n_sites);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut seen = Vec::new();
    for entry in &rv.entries {
        let partner = entry.label.negated();
        if seen.contains(&partner) {
            continue;
        }
        seen.push(entry.label.clone());
        let row = system_row(&entry.label).to_complex();
        let r = entry.value.value;
        rows.push(row.iter().map(|z| z.re).collect::<Vec<_>>());
        rhs.push(r.re);
        let imag: Vec<f64> = row.iter().map(|z| z.im).collect();
        if imag.iter().any(|v| v.abs() > FLOAT_TOL) {
            rows.push(imag);
            rhs.push(r.im);
        } else if r.im.abs() > FLOAT_TOL {
            return Err(LpError::InconsistentImaginary(r.im));
        }
    }
    Ok(LpProblem { rows, rhs, n_vars })
}

/// Solver statistics reported alongside the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpStats {
    pub constraints: usize,
    pub variables: usize,
    pub iterations: usize,
    pub exact: bool,
    pub pivot_log: Vec<String>,
}

/// Minimizes `D = Σ e_j` subject to `A_K e = r`, `e ≥ 0`.
pub fn minimize_scaling(rv: &RatioVector, verbose: bool) -> Result<(SolutionVector, LpStats), LpError> {
    if let Some(problem) = exact_problem(rv) {
        let sol = solve(&problem, verbose)?;
        let stats = LpStats {
            constraints: problem.rows.len(),
            variables: problem.n_vars,
            iterations: sol.iterations,
            exact: true,
            pivot_log: sol.pivot_log,
        };
        let e = SolutionVector { d: rv.d, n_sites: rv.n_sites, weights: Weights::Exact(sol.x) };
        return Ok((e, stats));
    }
    let problem = float_problem(rv)?;
    let sol = solve(&problem, verbose)?;
    let stats = LpStats {
        constraints: problem.rows.len(),
        variables: problem.n_vars,
        iterations: sol.iterations,
        exact: false,
        pivot_log: sol.pivot_log,
    };
    // clamp pivot noise below the tolerance
    let x = sol.x.into_iter().map(|v| if v.abs() < FLOAT_TOL { 0.0 } else { v }).collect();
    Ok((SolutionVector { d: rv.d, n_sites: rv.n_sites, weights: Weights::Float(x) }, stats))
}

/// Checks the dual certificate of an exact solution: `yᵀA_j ≤ 1` for every
/// column and `yᵀrhs = objective`.
pub fn certifies_optimality(problem: &LpProblem<BigRational>, sol: &LpSolution<BigRational>) -> bool {
    let one = BigRational::from_integer(1.into());
    let dual_feasible = (0..problem.n_vars).all(|j| {
        let yaj = problem
            .rows
            .iter()
            .zip(&sol.dual)
            .fold(BigRational::zero(), |acc, (row, y)| acc + &row[j] * y);
        yaj <= one
    });
    let dual_obj = problem.rhs.iter().zip(&sol.dual).fold(BigRational::zero(), |acc, (b, y)| acc + b * y);
    dual_feasible && dual_obj == sol.objective
}
