//! Exact algebra of generalized spin operators `σ_{j,k}` on `d`-level sites and
//! their tensor products.
//!
//! Every operator handled here is a basis element of the Weyl-Heisenberg group
//! times a power of `ω = exp(2πi/d)`. The power is tracked as an integer
//! exponent, so products, adjoints and conjugations never touch floating point.
//! Dense matrices are only produced on request for oracles and the simulator.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Errors raised by the operator algebra.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PauliError {
    #[error("site dimension must be at least 2, got {0}")]
    DimensionTooSmall(u32),
    #[error("operands disagree: {0}")]
    Mismatch(String),
    #[error("qubit index {0} is outside 0..=3")]
    QubitIndex(u32),
    #[error("cannot parse operator label {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// An exponent `p` standing for the phase `ω^p`, reduced modulo `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseExponent {
    value: u32,
    modulus: u32,
}

impl PhaseExponent {
    pub fn new(value: i64, d: u32) -> Self {
        Self { value: value.rem_euclid(d as i64) as u32, modulus: d }
    }

    pub fn zero(d: u32) -> Self {
        Self { value: 0, modulus: d }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// The complex number `ω^value`.
    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.value as i64, self.modulus)
    }
}

impl std::ops::Add for PhaseExponent {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        Self::new(self.value as i64 + other.value as i64, self.modulus)
    }
}

impl std::ops::Neg for PhaseExponent {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-(self.value as i64), self.modulus)
    }
}

/// `exp(2πi·p/d)`, with the exactly representable cases returned exactly.
pub fn root_of_unity(p: i64, d: u32) -> Complex64 {
    let p = p.rem_euclid(d as i64);
    if p == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * p == d as i64 {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * p == d as i64 {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * p == 3 * d as i64 {
        return Complex64::new(0.0, -1.0);
    }
    let angle = 2.0 * std::f64::consts::PI * p as f64 / d as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Index pair `(j, k)` of a single-site operator `σ_{j,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLabel {
    pub j: u32,
    pub k: u32,
}

impl SpinLabel {
    pub const IDENTITY: SpinLabel = SpinLabel { j: 0, k: 0 };

    /// Builds a label with both components reduced modulo `d`.
    pub fn new(j: i64, k: i64, d: u32) -> Self {
        let d = d as i64;
        Self { j: j.rem_euclid(d) as u32, k: k.rem_euclid(d) as u32 }
    }

    pub fn is_identity(self) -> bool {
        self.j == 0 && self.k == 0
    }

    /// Label of the operator proportional to the adjoint, `(d-j, d-k) mod d`.
    pub fn negated(self, d: u32) -> Self {
        Self::new(-(self.j as i64), -(self.k as i64), d)
    }

    /// Per-site column digit. For `d = 2` this is the usual Pauli digit
    /// (`0 = 1`, `1 = σ_1`, `2 = σ_2`, `3 = σ_3`); otherwise `j·d + k`.
    pub fn digit(self, d: u32) -> u32 {
        if d == 2 {
            match (self.j, self.k) {
                (0, 0) => 0,
                (0, 1) => 1,
                (1, 1) => 2,
                _ => 3,
            }
        } else {
            self.j * d + self.k
        }
    }

    pub fn from_digit(digit: u32, d: u32) -> Self {
        if d == 2 {
            // digit < 4 is guaranteed by callers
            qubit_label_map(digit).unwrap_or(Self::IDENTITY)
        } else {
            Self { j: digit / d, k: digit % d }
        }
    }
}

/// Maps the Pauli digit `σ_0..σ_3` onto the `(j, k)` labels for `d = 2`.
///
/// `σ_{1,1} = iσ_2`, so the digit `2` carries an extra factor `i` relative to
/// the Hermitian Pauli matrix. Conjugation exponents never see that factor.
pub fn qubit_label_map(i: u32) -> Result<SpinLabel, PauliError> {
    match i {
        0 => Ok(SpinLabel { j: 0, k: 0 }),
        1 => Ok(SpinLabel { j: 0, k: 1 }),
        2 => Ok(SpinLabel { j: 1, k: 1 }),
        3 => Ok(SpinLabel { j: 1, k: 0 }),
        other => Err(PauliError::QubitIndex(other)),
    }
}

/// Dense `d×d` matrix `Σ_l ω^{jl} |l⟩⟨l+k mod d|`.
pub fn dense_matrix(label: SpinLabel, d: u32) -> Result<DMatrix<Complex64>, PauliError> {
    if d < 2 {
        return Err(PauliError::DimensionTooSmall(d));
    }
    let n = d as usize;
    let mut m = DMatrix::zeros(n, n);
    for l in 0..n {
        let col = (l + label.k as usize) % n;
        m[(l, col)] = root_of_unity(label.j as i64 * l as i64, d);
    }
    Ok(m)
}

/// Dense matrix of the Hermitian qubit basis element for a Pauli digit.
pub(crate) fn hermitian_qubit_matrix(label: SpinLabel) -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match label.digit(2) {
        0 => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
        1 => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        2 => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        _ => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    }
}

/// Kronecker product of two dense matrices.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// An `N`-site tensor product `ω^phase · σ_{j_1,k_1} ⊗ ... ⊗ σ_{j_N,k_N}`.
///
/// Equality, ordering and hashing compare the basis content only; the phase is
/// reachable through [`PauliString::phase`].
#[derive(Debug, Clone)]
pub struct PauliString {
    d: u32,
    sites: Vec<SpinLabel>,
    phase: u32,
}

impl PartialEq for PauliString {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.sites == other.sites
    }
}

impl Eq for PauliString {}

impl std::hash::Hash for PauliString {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.d.hash(state);
        self.sites.hash(state);
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.d, self.sites.len(), self.index()).cmp(&(other.d, other.sites.len(), other.index()))
    }
}

impl PauliString {
    pub fn identity(d: u32, n_sites: usize) -> Self {
        Self { d, sites: vec![SpinLabel::IDENTITY; n_sites], phase: 0 }
    }

    pub fn new(d: u32, sites: Vec<SpinLabel>) -> Result<Self, PauliError> {
        if d < 2 {
            return Err(PauliError::DimensionTooSmall(d));
        }
        let sites = sites
            .into_iter()
            .map(|s| SpinLabel::new(s.j as i64, s.k as i64, d))
            .collect();
        Ok(Self { d, sites, phase: 0 })
    }

    /// Builds a qubit string from Pauli digits, e.g. `[3, 0]` for `σ_3 ⊗ 1`.
    pub fn from_qubit_digits(digits: &[u32]) -> Result<Self, PauliError> {
        let sites = digits.iter().map(|&i| qubit_label_map(i)).collect::<Result<_, _>>()?;
        Ok(Self { d: 2, sites, phase: 0 })
    }

    /// Column index of the basis content: site 1 is the most significant
    /// base-`d²` digit.
    pub fn from_index(index: usize, d: u32, n_sites: usize) -> Self {
        let base = (d * d) as usize;
        let mut sites = vec![SpinLabel::IDENTITY; n_sites];
        let mut rest = index;
        for site in sites.iter_mut().rev() {
            *site = SpinLabel::from_digit((rest % base) as u32, d);
            rest /= base;
        }
        Self { d, sites, phase: 0 }
    }

    pub fn index(&self) -> usize {
        let base = (self.d * self.d) as usize;
        self.sites.iter().fold(0, |acc, s| acc * base + s.digit(self.d) as usize)
    }

    pub fn with_phase(mut self, phase: i64) -> Self {
        self.phase = phase.rem_euclid(self.d as i64) as u32;
        self
    }

    /// The same basis element with phase exponent 0.
    pub fn basis(&self) -> Self {
        Self { d: self.d, sites: self.sites.clone(), phase: 0 }
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SpinLabel] {
        &self.sites
    }

    pub fn phase(&self) -> PhaseExponent {
        PhaseExponent { value: self.phase, modulus: self.d }
    }

    pub fn is_identity(&self) -> bool {
        self.sites.iter().all(|s| s.is_identity())
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.sites.iter().filter(|s| !s.is_identity()).count()
    }

    /// Basis content of the adjoint, i.e. the label `(-j, -k)`.
    pub fn negated(&self) -> Self {
        let sites = self.sites.iter().map(|s| s.negated(self.d)).collect();
        Self { d: self.d, sites, phase: 0 }
    }

    /// `⟨j, k⟩ = Σ_i j_i k_i mod d`.
    pub fn self_pairing(&self) -> PhaseExponent {
        let sum: i64 = self.sites.iter().map(|s| s.j as i64 * s.k as i64).sum();
        PhaseExponent::new(sum, self.d)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PauliError> {
        if self.d != other.d {
            return Err(PauliError::Mismatch(format!("dimensions {} and {}", self.d, other.d)));
        }
        if self.sites.len() != other.sites.len() {
            return Err(PauliError::Mismatch(format!(
                "site counts {} and {}",
                self.sites.len(),
                other.sites.len()
            )));
        }
        Ok(())
    }

    /// Sitewise `σ_{j,k} σ_{s,t} = ω^{sk} σ_{j+s, k+t}`.
    pub fn product(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_compatible(other)?;
        let d = self.d as i64;
        let mut phase = self.phase as i64 + other.phase as i64;
        let sites = self
            .sites
            .iter()
            .zip(&other.sites)
            .map(|(a, b)| {
                phase += b.j as i64 * a.k as i64;
                SpinLabel::new(a.j as i64 + b.j as i64, a.k as i64 + b.k as i64, self.d)
            })
            .collect();
        Ok(Self { d: self.d, sites, phase: phase.rem_euclid(d) as u32 })
    }

    /// Sitewise `σ_{j,k}† = ω^{jk} σ_{d-j, d-k}`; the input phase is negated.
    pub fn adjoint(&self) -> Self {
        let phase = self.self_pairing().value() as i64 - self.phase as i64;
        let mut out = self.negated();
        out.phase = phase.rem_euclid(self.d as i64) as u32;
        out
    }

    /// Dense matrix including the tracked phase.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, self.phase().to_complex());
        for s in &self.sites {
            // d >= 2 is an invariant of the type
            m = kron(&m, &dense_matrix(*s, self.d).expect("valid dimension"));
        }
        m
    }

    /// Dense matrix of the Hamiltonian basis element for this label.
    ///
    /// For `d = 2` the Hermitian Pauli products are used (`σ_2` instead of
    /// `σ_{1,1} = iσ_2`); for `d > 2` this is the plain `σ_{j,k}` product.
    /// The tracked phase is ignored.
    pub fn hamiltonian_basis_dense(&self) -> DMatrix<Complex64> {
        if self.d != 2 {
            return self.basis().to_dense();
        }
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for s in &self.sites {
            m = kron(&m, &hermitian_qubit_matrix(*s));
        }
        m
    }

    /// Parses the canonical rendering (`w^1*1.0x0.1`) or, for `d = 2`, a
    /// string of Pauli digits such as `30`.
    pub fn parse(text: &str, d: u32) -> Result<Self, PauliError> {
        if d < 2 {
            return Err(PauliError::DimensionTooSmall(d));
        }
        let err = |reason: &str| PauliError::Parse { text: text.to_string(), reason: reason.to_string() };
        let text_trim = text.trim();
        let (phase, body) = match text_trim.strip_prefix("w^") {
            Some(rest) => {
                let (p, body) = rest.split_once('*').ok_or_else(|| err("phase prefix needs '*'"))?;
                let p: i64 = p.parse().map_err(|_| err("phase exponent is not an integer"))?;
                (p, body)
            }
            None => (0, text_trim),
        };
        if body.is_empty() {
            return Err(err("empty label"));
        }
        let sites: Vec<SpinLabel> = if body.contains('.') {
            body.split('x')
                .map(|tok| {
                    let (j, k) = tok.split_once('.').ok_or_else(|| err("site token must be j.k"))?;
                    let j: u32 = j.parse().map_err(|_| err("bad j index"))?;
                    let k: u32 = k.parse().map_err(|_| err("bad k index"))?;
                    if j >= d || k >= d {
                        return Err(err("index out of range for dimension"));
                    }
                    Ok(SpinLabel { j, k })
                })
                .collect::<Result<_, _>>()?
        } else if d == 2 {
            body.chars()
                .map(|c| {
                    let digit = c.to_digit(10).ok_or_else(|| err("expected Pauli digits 0-3"))?;
                    qubit_label_map(digit).map_err(|_| err("Pauli digit out of range"))
                })
                .collect::<Result<_, _>>()?
        } else {
            return Err(err("labels for d > 2 must use j.k tokens"));
        };
        Ok(Self { d, sites, phase: phase.rem_euclid(d as i64) as u32 })
    }

    /// Label as written in Hamiltonian files: Pauli digits for `d = 2`,
    /// `j.k` tokens joined by `x` otherwise. The phase is not rendered.
    pub fn file_token(&self) -> String {
        if self.d == 2 {
            self.sites.iter().map(|s| char::from(b'0' + s.digit(2) as u8)).collect()
        } else {
            self.sites.iter().map(|s| format!("{}.{}", s.j, s.k)).collect::<Vec<_>>().join("x")
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != 0 {
            write!(f, "w^{}*", self.phase)?;
        }
        let body = self.sites.iter().map(|s| format!("{}.{}", s.j, s.k)).collect::<Vec<_>>().join("x");
        f.write_str(&body)
    }
}

/// Exponent `p` in `S_{j,k}† S_{s,t} S_{j,k} = ω^p S_{s,t}`, where `(s,t)` labels
/// `target` and `(j,k)` labels `by`: `p = Σ_i (j_i t_i − k_i s_i) mod d`.
pub fn conjugation_exponent(target: &PauliString, by: &PauliString) -> Result<PhaseExponent, PauliError> {
    target.check_compatible(by)?;
    Ok(conjugation_exponent_unchecked(target.sites(), by.sites(), target.d))
}

pub(crate) fn conjugation_exponent_unchecked(target: &[SpinLabel], by: &[SpinLabel], d: u32) -> PhaseExponent {
    let sum: i64 = target
        .iter()
        .zip(by)
        .map(|(t, b)| b.j as i64 * t.k as i64 - b.k as i64 * t.j as i64)
        .sum();
    PhaseExponent::new(sum, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjoint_dense(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        m.adjoint()
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= tol)
    }

    fn single(j: u32, k: u32, d: u32) -> PauliString {
        PauliString::new(d, vec![SpinLabel { j, k }]).unwrap()
    }

    #[test]
    fn dense_sigma3_for_qubits() {
        let m = dense_matrix(SpinLabel { j: 1, k: 0 }, 2).unwrap();
        let z = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        );
        assert!(close(&m, &z, 0.0));
    }

    #[test]
    fn dense_identity_and_small_dimension() {
        for d in 2..6 {
            let m = dense_matrix(SpinLabel::IDENTITY, d).unwrap();
            assert!(close(&m, &DMatrix::identity(d as usize, d as usize), 0.0));
        }
        assert_eq!(dense_matrix(SpinLabel::IDENTITY, 1), Err(PauliError::DimensionTooSmall(1)));
    }

    #[test]
    fn dense_shift_clock_d3_is_unitary() {
        let m = dense_matrix(SpinLabel { j: 1, k: 1 }, 3).unwrap();
        for l in 0..3usize {
            let expected = root_of_unity(l as i64, 3);
            assert!((m[(l, (l + 1) % 3)] - expected).norm() < 1e-15);
        }
        let prod = &m * adjoint_dense(&m);
        assert!(close(&prod, &DMatrix::identity(3, 3), 1e-14));
    }

    #[test]
    fn product_examples() {
        let x = single(0, 1, 2);
        let z = single(1, 0, 2);
        let p = z.product(&x).unwrap();
        assert_eq!(p.sites(), &[SpinLabel { j: 1, k: 1 }]);
        assert_eq!(p.phase().value(), 0);

        let id = PauliString::identity(2, 1);
        let q = z.product(&id).unwrap();
        assert_eq!(q, z);
        assert_eq!(q.phase().value(), 0);

        let a = single(1, 2, 3);
        let b = single(2, 2, 3);
        let p = a.product(&b).unwrap();
        assert_eq!(p.sites(), &[SpinLabel { j: 0, k: 1 }]);
        assert_eq!(p.phase().value(), 1);
        assert!(close(&p.to_dense(), &(a.to_dense() * b.to_dense()), 1e-14));
    }

    #[test]
    fn product_rejects_mismatch() {
        let a = PauliString::identity(2, 1);
        let b = PauliString::identity(3, 1);
        assert!(matches!(a.product(&b), Err(PauliError::Mismatch(_))));
        let c = PauliString::identity(2, 2);
        assert!(matches!(a.product(&c), Err(PauliError::Mismatch(_))));
    }

    #[test]
    fn adjoint_examples() {
        let y = single(1, 1, 2).adjoint();
        assert_eq!(y.sites(), &[SpinLabel { j: 1, k: 1 }]);
        assert_eq!(y.phase().value(), 1);

        let id = PauliString::identity(4, 3);
        assert_eq!(id.adjoint().phase().value(), 0);
        assert!(id.adjoint().is_identity());

        let a = single(2, 1, 5);
        let adj = a.adjoint();
        assert_eq!(adj.sites(), &[SpinLabel { j: 3, k: 4 }]);
        assert_eq!(adj.phase().value(), 2);
        assert!(close(&adj.to_dense(), &a.to_dense().adjoint(), 1e-14));
    }

    #[test]
    fn conjugation_examples() {
        let e = conjugation_exponent(&single(1, 0, 2), &single(0, 1, 2)).unwrap();
        assert_eq!(e.value(), 1);
        let id = PauliString::identity(3, 1);
        assert!(conjugation_exponent(&single(2, 1, 3), &id).unwrap().is_zero());

        let target = single(1, 2, 3);
        let by = single(2, 1, 3);
        let e = conjugation_exponent(&target, &by).unwrap();
        assert_eq!(e.value(), 0);
        let lhs = by.to_dense().adjoint() * target.to_dense() * by.to_dense();
        let rhs = target.to_dense() * e.to_complex();
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn qubit_map_matches_pauli_matrices() {
        assert_eq!(qubit_label_map(0).unwrap(), SpinLabel { j: 0, k: 0 });
        assert_eq!(qubit_label_map(4), Err(PauliError::QubitIndex(4)));
        let x = dense_matrix(qubit_label_map(1).unwrap(), 2).unwrap();
        assert!(close(&x, &hermitian_qubit_matrix(SpinLabel { j: 0, k: 1 }), 0.0));
        let iy = dense_matrix(qubit_label_map(2).unwrap(), 2).unwrap();
        let y = hermitian_qubit_matrix(SpinLabel { j: 1, k: 1 });
        assert!(close(&iy, &(y * Complex64::new(0.0, 1.0)), 0.0));
        let mut seen: Vec<_> = (0..4).map(|i| qubit_label_map(i).unwrap()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn qubit_conjugation_signs_match_sylvester_seed() {
        // independent route: sign of P_j† P_k P_j computed from the Hermitian Pauli matrices
        let expected = [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]];
        for k in 0..4u32 {
            for j in 0..4u32 {
                let pk = hermitian_qubit_matrix(qubit_label_map(k).unwrap());
                let pj = hermitian_qubit_matrix(qubit_label_map(j).unwrap());
                let conj = pj.adjoint() * &pk * &pj;
                let sign = if close(&conj, &pk, 1e-14) { 1 } else { -1 };
                assert_eq!(sign, expected[k as usize][j as usize]);
                let e = conjugation_exponent(
                    &PauliString::from_qubit_digits(&[k]).unwrap(),
                    &PauliString::from_qubit_digits(&[j]).unwrap(),
                )
                .unwrap();
                assert_eq!(if e.is_zero() { 1 } else { -1 }, sign);
            }
        }
    }

    #[test]
    fn index_round_trip_and_qubit_digits() {
        let s = PauliString::from_qubit_digits(&[3, 0, 2]).unwrap();
        assert_eq!(s.index(), 3 * 16 + 2);
        assert_eq!(PauliString::from_index(s.index(), 2, 3), s);
        assert_eq!(s.file_token(), "302");
        for idx in 0..81 {
            let p = PauliString::from_index(idx, 3, 2);
            assert_eq!(p.index(), idx);
        }
    }

    #[test]
    fn text_rendering() {
        let s = PauliString::new(2, vec![SpinLabel { j: 1, k: 0 }, SpinLabel { j: 0, k: 1 }])
            .unwrap()
            .with_phase(1);
        assert_eq!(s.to_string(), "w^1*1.0x0.1");
        let back = PauliString::parse("w^1*1.0x0.1", 2).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.phase().value(), 1);
        assert_eq!(PauliString::parse("31", 2).unwrap(), s);
        assert!(PauliString::parse("34", 2).is_err());
        assert!(PauliString::parse("12", 3).is_err());
        assert!(PauliString::parse("1.3", 3).is_err());
        assert_eq!(PauliString::parse("2.1x0.2", 3).unwrap().file_token(), "2.1x0.2");
    }
}
