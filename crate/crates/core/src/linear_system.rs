//! The linear system `A_K · e = r` linking pulse-label frequencies to the
//! achieved first-order Hamiltonian, its particular and homogeneous solutions,
//! and the rounding of a non-negative solution into integer counts.
//!
//! Rows of `A` are generated on demand from conjugation exponents; the full
//! `d^{2N} × d^{2N}` matrix is never stored. Qubit problems with rational
//! targets are solved in exact rational arithmetic, everything else in `f64`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::hamiltonian::RatioVector;
use crate::numeric::{best_rational_approximation, best_rational_approximation_f64, to_f64};
use crate::pauli::{conjugation_exponent_unchecked, PauliString, PhaseExponent};

/// Tolerance for imaginary residue and residual checks on the floating path.
pub const FLOAT_TOL: f64 = 1e-10;

/// Default bound on denominators during rationalization.
pub const DEFAULT_MAX_DENOMINATOR: u64 = 64;

/// Denominator bound for a floating scaling factor; `D` only stretches time
/// and need not be a simple fraction.
pub const SCALING_MAX_DENOMINATOR: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("solution has imaginary residue {0:e}; the input is not Hermitian")]
    ImaginaryResidue(f64),
    #[error("label {0} is part of the index set and cannot carry a homogeneous shift")]
    LabelInSystem(String),
    #[error("label does not match the system shape")]
    ShapeMismatch,
    #[error("max_denominator must be at least 1")]
    BadDenominator,
    #[error("solution entry {index} is negative ({value:e})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("solution is identically zero")]
    ZeroSolution,
}

/// Number of columns `d^{2N}`.
pub fn column_count(d: u32, n_sites: usize) -> usize {
    ((d * d) as usize).pow(n_sites as u32)
}

/// One row `a_{k,·}` of the system matrix as phase exponents over all columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub label: PauliString,
    pub entries: Vec<PhaseExponent>,
}

impl SystemRow {
    pub fn value(&self, column: usize) -> Complex64 {
        self.entries[column].to_complex()
    }

    /// Entry as `±1` for qubit rows.
    pub fn sign(&self, column: usize) -> i64 {
        debug_assert_eq!(self.label.dim(), 2);
        if self.entries[column].is_zero() {
            1
        } else {
            -1
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.to_complex()).collect()
    }
}

/// Row of `A` for `label`: entry `j` is the exponent of `S_j† S_k S_j = ω^{a} S_k`.
pub fn system_row(label: &PauliString) -> SystemRow {
    let d = label.dim();
    let n = label.n_sites();
    let entries = (0..column_count(d, n))
        .map(|col| {
            let by = PauliString::from_index(col, d, n);
            conjugation_exponent_unchecked(label.sites(), by.sites(), d)
        })
        .collect();
    SystemRow { label: label.basis(), entries }
}

/// Rows for every label of the ratio vector, in its order.
pub fn system_rows(rv: &RatioVector) -> Vec<SystemRow> {
    rv.labels().map(system_row).collect()
}

/// Real solution vector `e` with `D = Σ e`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVector {
    pub d: u32,
    pub n_sites: usize,
    pub weights: Weights,
}

impl SolutionVector {
    pub fn len(&self) -> usize {
        match &self.weights {
            Weights::Exact(v) => v.len(),
            Weights::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Exact(v) => v.iter().map(to_f64).collect(),
            Weights::Float(v) => v.clone(),
        }
    }

    /// `D = Σ e_j`.
    pub fn scaling(&self) -> f64 {
        match &self.weights {
            Weights::Exact(v) => to_f64(&v.iter().fold(BigRational::zero(), |acc, x| acc + x)),
            Weights::Float(v) => v.iter().sum(),
        }
    }

    pub fn exact_scaling(&self) -> Option<BigRational> {
        match &self.weights {
            Weights::Exact(v) => Some(v.iter().fold(BigRational::zero(), |acc, x| acc + x)),
            Weights::Float(_) => None,
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.to_f64().into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn exact_targets(rv: &RatioVector) -> Option<Vec<BigRational>> {
    if rv.d != 2 {
        return None;
    }
    rv.entries.iter().map(|e| e.value.exact_real().cloned()).collect()
}

/// `e_r = d^{-2N} A_K† r`.
pub fn particular_solution(rv: &RatioVector) -> Result<SolutionVector, SystemError> {
    let cols = column_count(rv.d, rv.n_sites);
    let rows = system_rows(rv);
    if let Some(targets) = exact_targets(rv) {
        let norm = BigRational::from_integer(BigInt::from(cols));
        let mut e = vec![BigRational::zero(); cols];
        for (row, r) in rows.iter().zip(&targets) {
            if r.is_zero() {
                continue;
            }
            for (col, slot) in e.iter_mut().enumerate() {
                if row.sign(col) > 0 {
                    *slot += r;
                } else {
                    *slot -= r;
                }
            }
        }
        let e = e.into_iter().map(|x| x / &norm).collect();
        return Ok(SolutionVector { d: rv.d, n_sites: rv.n_sites, weights: Weights::Exact(e) });
    }
    let targets = rv.values();
    let mut e = vec![Complex64::new(0.0, 0.0); cols];
    for (row, r) in rows.iter().zip(&targets) {
        for (col, slot) in e.iter_mut().enumerate() {
            *slot += row.value(col).conj() * r;
        }
    }
    let scale = 1.0 / cols as f64;
    let max_imag = e.iter().map(|z| (z.im * scale).abs()).fold(0.0, f64::max);
    if max_imag > FLOAT_TOL {
        return Err(SystemError::ImaginaryResidue(max_imag));
    }
    let e = e.into_iter().map(|z| z.re * scale).collect();
    Ok(SolutionVector { d: rv.d, n_sites: rv.n_sites, weights: Weights::Float(e) })
}

/// `‖A_K e − r‖_∞`, evaluated in floating point.
pub fn residual(rv: &RatioVector, e: &SolutionVector) -> f64 {
    let values = e.to_f64();
    system_rows(rv)
        .iter()
        .zip(rv.values())
        .map(|(row, r)| {
            let lhs: Complex64 = values.iter().enumerate().map(|(c, &x)| row.value(c) * x).sum();
            (lhs - r).norm()
        })
        .fold(0.0, f64::max)
}

/// Exact check `A_K e = r` for qubit systems with exact data; `None` when
/// either side is not exact.
pub fn exact_residual_is_zero(rv: &RatioVector, e: &SolutionVector) -> Option<bool> {
    let targets = exact_targets(rv)?;
    let Weights::Exact(values) = &e.weights else { return None };
    Some(system_rows(rv).iter().zip(&targets).all(|(row, r)| {
        let lhs = values.iter().enumerate().fold(BigRational::zero(), |acc, (c, x)| {
            if row.sign(c) > 0 {
                acc + x
            } else {
                acc - x
            }
        });
        &lhs == r
    }))
}

/// Adds `γ_0 = −min e_j` times the all-ones row so every entry is
/// non-negative. An identically zero vector is lifted to the all-ones vector,
/// which corresponds to using every label once (full decoupling).
pub fn shift_nonnegative(e: &SolutionVector) -> SolutionVector {
    let weights = match &e.weights {
        Weights::Exact(v) => {
            let min = v.iter().min().cloned().unwrap_or_else(BigRational::zero);
            let shift = if v.iter().all(|x| x.is_zero()) {
                BigRational::one()
            } else if min.is_negative() {
                -min
            } else {
                BigRational::zero()
            };
            Weights::Exact(v.iter().map(|x| x + &shift).collect())
        }
        Weights::Float(v) => {
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let shift = if v.iter().all(|x| *x == 0.0) {
                1.0
            } else if min < 0.0 {
                -min
            } else {
                0.0
            };
            Weights::Float(v.iter().map(|x| x + shift).collect())
        }
    };
    SolutionVector { d: e.d, n_sites: e.n_sites, weights }
}

/// Adds `w·A_label` (plus `w·A_{-label}` when that row is the complex
/// conjugate of a distinct row) to `e`. The label must lie outside `K`.
pub fn add_homogeneous(
    e: &SolutionVector,
    rv: &RatioVector,
    label: &PauliString,
    weight: f64,
) -> Result<SolutionVector, SystemError> {
    if label.dim() != e.d || label.n_sites() != e.n_sites {
        return Err(SystemError::ShapeMismatch);
    }
    if rv.labels().any(|l| l == label) {
        return Err(SystemError::LabelInSystem(label.file_token()));
    }
    let row = system_row(label);
    let partner = label.negated();
    let self_conjugate = &partner == label;
    // w·a + w·a* = 2w·Re(a) for a distinct conjugate pair
    let factor = if self_conjugate { 1.0 } else { 2.0 };
    let weights = match &e.weights {
        Weights::Exact(v) if e.d == 2 => {
            let w = BigRational::from_float(weight).ok_or(SystemError::ShapeMismatch)?;
            Weights::Exact(
                v.iter()
                    .enumerate()
                    .map(|(c, x)| if row.sign(c) > 0 { x + &w } else { x - &w })
                    .collect(),
            )
        }
        _ => Weights::Float(
            e.to_f64()
                .into_iter()
                .enumerate()
                .map(|(c, x)| x + factor * weight * row.value(c).re)
                .collect(),
        ),
    };
    Ok(SolutionVector { d: e.d, n_sites: e.n_sites, weights })
}

/// Integer pulse counts `c_j` with `Σ c_j = m` and scaling `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountVector {
    pub d: u32,
    pub n_sites: usize,
    /// Non-zero counts by label, ordered by column index.
    pub counts: Vec<(PauliString, u64)>,
    pub m: u64,
    pub scaling: BigRational,
    /// `max_j |c_j/m − e_j/D|`.
    pub rounding_error: f64,
}

impl CountVector {
    /// Builds counts from `(label, count)` pairs; repeated labels are merged.
    pub fn from_counts(d: u32, n_sites: usize, pairs: Vec<(PauliString, u64)>, scaling: BigRational) -> Self {
        let mut merged: std::collections::BTreeMap<usize, (PauliString, u64)> = Default::default();
        for (label, c) in pairs {
            if c == 0 {
                continue;
            }
            merged.entry(label.index()).or_insert((label.basis(), 0)).1 += c;
        }
        let counts: Vec<_> = merged.into_values().collect();
        let m = counts.iter().map(|(_, c)| c).sum();
        Self { d, n_sites, counts, m, scaling, rounding_error: 0.0 }
    }

    pub fn count_of(&self, label: &PauliString) -> u64 {
        self.counts.iter().find(|(l, _)| l == label).map_or(0, |(_, c)| *c)
    }

    pub fn scaling_f64(&self) -> f64 {
        to_f64(&self.scaling)
    }
}

/// Rounds `e_j / D` to fractions with denominator at most `max_denominator`
/// and scales them by their least common denominator `m`. When that
/// denominator exceeds `max_denominator`, the fractions are instead rounded
/// to a common denominator `m ≤ max_denominator`.
pub fn rationalize(e: &SolutionVector, max_denominator: u64) -> Result<CountVector, SystemError> {
    if max_denominator < 1 {
        return Err(SystemError::BadDenominator);
    }
    let max_den = BigInt::from(max_denominator);
    let values = e.to_f64();
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < -FLOAT_TOL) {
        return Err(SystemError::NegativeEntry { index, value });
    }
    let (fractions, ideal, scaling): (Vec<BigRational>, Vec<f64>, BigRational) = match &e.weights {
        Weights::Exact(v) => {
            if let Some((index, x)) = v.iter().enumerate().find(|(_, x)| x.is_negative()) {
                return Err(SystemError::NegativeEntry { index, value: to_f64(x) });
            }
            let total = v.iter().fold(BigRational::zero(), |acc, x| acc + x);
            if total.is_zero() {
                return Err(SystemError::ZeroSolution);
            }
            let exact: Vec<BigRational> = v.iter().map(|x| x / &total).collect();
            let ideal = exact.iter().map(to_f64).collect();
            let fr = exact.iter().map(|x| best_rational_approximation(x, &max_den)).collect();
            (fr, ideal, total)
        }
        Weights::Float(v) => {
            let total: f64 = v.iter().map(|x| x.max(0.0)).sum();
            if total <= 0.0 {
                return Err(SystemError::ZeroSolution);
            }
            let ideal: Vec<f64> = v.iter().map(|x| x.max(0.0) / total).collect();
            let fr = ideal
                .iter()
                .map(|&x| best_rational_approximation_f64(x, max_denominator).unwrap_or_else(BigRational::zero))
                .collect();
            let scaling = best_rational_approximation_f64(total, SCALING_MAX_DENOMINATOR).unwrap_or_else(BigRational::zero);
            (fr, ideal, scaling)
        }
    };
    let fractions = close_to_unit_sum(fractions, &ideal);
    let lcm = fractions
        .iter()
        .filter(|f| !f.is_zero())
        .fold(BigInt::one(), |acc, f| acc.lcm(f.denom()));
    let (fractions, m) = if lcm <= max_den {
        (fractions, lcm)
    } else {
        let (m, counts) = common_denominator(&ideal, max_denominator);
        let m_big = BigInt::from(m);
        let fr = counts.into_iter().map(|c| BigRational::new(BigInt::from(c), m_big.clone())).collect();
        (fr, m_big)
    };
    let m_rat = BigRational::from_integer(m.clone());
    let mut pairs = Vec::new();
    let mut rounding_error: f64 = 0.0;
    for (col, (f, x)) in fractions.iter().zip(&ideal).enumerate() {
        rounding_error = rounding_error.max((to_f64(f) - x).abs());
        if f.is_zero() {
            continue;
        }
        let c = (f * &m_rat).to_integer().to_u64().expect("count fits in u64");
        pairs.push((PauliString::from_index(col, e.d, e.n_sites), c));
    }
    let mut counts = CountVector::from_counts(e.d, e.n_sites, pairs, scaling);
    counts.rounding_error = rounding_error;
    debug_assert_eq!(BigInt::from(counts.m), m);
    Ok(counts)
}

/// Sequence length `m ≤ max_m` and counts with `Σ c = m` minimizing
/// `max_j |c_j/m − x_j|` (largest-remainder rounding; smallest `m` on ties).
fn common_denominator(ideal: &[f64], max_m: u64) -> (u64, Vec<u64>) {
    let mut best: Option<(f64, u64, Vec<u64>)> = None;
    for m in 1..=max_m {
        let scaled: Vec<f64> = ideal.iter().map(|x| x * m as f64).collect();
        let mut counts: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
        let assigned: u64 = counts.iter().sum();
        let mut order: Vec<usize> = (0..ideal.len()).collect();
        order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())).then(a.cmp(&b)));
        for &i in order.iter().take(m.saturating_sub(assigned) as usize) {
            counts[i] += 1;
        }
        let err = counts
            .iter()
            .zip(ideal)
            .map(|(&c, x)| (c as f64 / m as f64 - x).abs())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(e, _, _)| err < *e - 1e-15) {
            best = Some((err, m, counts));
        }
    }
    let (_, m, counts) = best.expect("max_m >= 1");
    (m, counts)
}

/// Forces `Σ f = 1` by recomputing the largest fraction from the others.
fn close_to_unit_sum(mut fractions: Vec<BigRational>, ideal: &[f64]) -> Vec<BigRational> {
    let total = fractions.iter().fold(BigRational::zero(), |acc, x| acc + x);
    if total.is_one() {
        return fractions;
    }
    let largest = ideal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let others = &total - &fractions[largest];
    let fixed = BigRational::one() - others;
    fractions[largest] = if fixed.is_negative() { BigRational::zero() } else { fixed };
    fractions
}

/// CSV dump of `A_K` (one line per label in `K`, complex entries as `re+imi`).
pub fn system_matrix_csv(rv: &RatioVector) -> String {
    let cols = column_count(rv.d, rv.n_sites);
    let mut out = String::from("label");
    for c in 0..cols {
        let _ = write!(out, ",{}", PauliString::from_index(c, rv.d, rv.n_sites).file_token());
    }
    out.push('\n');
    for row in system_rows(rv) {
        out.push_str(&row.label.file_token());
        for z in row.to_complex() {
            let _ = write!(out, ",{}{:+}i", z.re, z.im);
        }
        out.push('\n');
    }
    out
}
