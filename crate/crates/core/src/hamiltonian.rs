//! Sparse Hamiltonians expanded in the generalized Pauli basis, their text
//! format, the Hermiticity check and the target ratio vector.
//!
//! For `d = 2` coefficients refer to the Hermitian Pauli products
//! (`σ_2`, not `σ_{1,1} = iσ_2`), so a Hermitian qubit Hamiltonian has real
//! coefficients. For `d > 2` coefficients multiply the `σ_{j,k}` products.

use std::fmt::Write as _;

use indexmap::IndexMap;
use num_complex::Complex64;

use crate::numeric::{parse_coefficient, Coefficient};
use crate::pauli::{PauliError, PauliString};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: identity label is not allowed (Hamiltonians are traceless)")]
    IdentityLabel { line: usize },
    #[error("line {line}: zero coefficient")]
    ZeroCoefficient { line: usize },
    #[error("line {line}: label has {found} sites, header declares {expected}")]
    SiteCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: {source}")]
    Label { line: usize, source: PauliError },
    #[error("missing `dim <d> sites <N>` header")]
    MissingHeader,
    #[error("no terms given")]
    Empty,
    #[error("line {line}: environment-coupled terms are not allowed in a target")]
    EnvInTarget { line: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TargetError {
    #[error("target and Hamiltonian disagree on dimension or site count")]
    ShapeMismatch,
    #[error("target term {0} is absent from the Hamiltonian and cannot be created")]
    Unreachable(String),
    #[error("target keeps {0}, which couples to the environment and can only be suppressed")]
    EnvironmentCoupled(String),
}

/// One basis term `μ S_k` (or `S_k ⊗ E_k` when environment-coupled).
#[derive(Debug, Clone, PartialEq)]
pub struct HamTerm {
    pub label: PauliString,
    pub coeff: Coefficient,
    pub env_coupled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    d: u32,
    n_sites: usize,
    terms: IndexMap<PauliString, HamTerm>,
}

impl HamiltonianSpec {
    pub fn new(d: u32, n_sites: usize) -> Self {
        Self { d, n_sites, terms: IndexMap::new() }
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> impl Iterator<Item = &HamTerm> {
        self.terms.values()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, label: &PauliString) -> Option<&HamTerm> {
        self.terms.get(label)
    }

    /// Adds a term, summing coefficients of repeated labels. A label becomes
    /// environment-coupled as soon as one contribution is.
    ///
    /// Panics if the label does not match the spec's shape or is the identity.
    pub fn add_term(&mut self, label: PauliString, coeff: Coefficient, env_coupled: bool) {
        assert_eq!(label.dim(), self.d, "label dimension");
        assert_eq!(label.n_sites(), self.n_sites, "label site count");
        assert!(!label.is_identity(), "identity label");
        let label = label.basis();
        match self.terms.get_mut(&label) {
            Some(term) => {
                term.coeff = term.coeff.add(&coeff);
                term.env_coupled |= env_coupled;
            }
            None => {
                self.terms.insert(label.clone(), HamTerm { label, coeff, env_coupled });
            }
        }
    }

    /// Coefficient in the `σ_{j,k}` product basis (differs from the stored one
    /// for `d = 2` by `(-i)` per `σ_2` factor).
    pub fn weyl_coefficient(&self, term: &HamTerm) -> Complex64 {
        if self.d == 2 {
            let ys = term.label.sites().iter().filter(|s| s.j == 1 && s.k == 1).count();
            term.coeff.value * Complex64::new(0.0, -1.0).powu(ys as u32)
        } else {
            term.coeff.value
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("dim {} sites {}\n", self.d, self.n_sites);
        for term in self.terms.values() {
            let kind = if term.env_coupled { "envterm" } else { "term" };
            let _ = writeln!(out, "{kind} {} {}", term.label.file_token(), term.coeff.render());
        }
        out
    }
}

/// Parses a Hamiltonian file (`envterm` lines allowed).
pub fn parse_hamiltonian(text: &str) -> Result<HamiltonianSpec, ParseError> {
    parse_spec(text, true)
}

/// Parses a target file (same grammar, `envterm` forbidden).
pub fn parse_target(text: &str) -> Result<HamiltonianSpec, ParseError> {
    parse_spec(text, false)
}

fn parse_spec(text: &str, allow_env: bool) -> Result<HamiltonianSpec, ParseError> {
    let mut spec: Option<HamiltonianSpec> = None;
    let mut zero_lines: IndexMap<PauliString, usize> = IndexMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let malformed = |reason: &str| ParseError::Malformed { line, reason: reason.to_string() };
        match fields[0] {
            "dim" => {
                if spec.is_some() {
                    return Err(malformed("duplicate header"));
                }
                if fields.len() != 4 || fields[2] != "sites" {
                    return Err(malformed("header must read `dim <d> sites <N>`"));
                }
                let d: u32 = fields[1].parse().map_err(|_| malformed("bad dimension"))?;
                let n: usize = fields[3].parse().map_err(|_| malformed("bad site count"))?;
                if d < 2 || n == 0 {
                    return Err(malformed("dimension must be >= 2 and site count >= 1"));
                }
                spec = Some(HamiltonianSpec::new(d, n));
            }
            kind @ ("term" | "envterm") => {
                let spec = spec.as_mut().ok_or(ParseError::MissingHeader)?;
                let env = kind == "envterm";
                if env && !allow_env {
                    return Err(ParseError::EnvInTarget { line });
                }
                let coeff = match (env, fields.len()) {
                    (_, 4) => parse_coefficient(fields[2], fields[3]).ok_or_else(|| malformed("bad coefficient"))?,
                    (true, 2) => Coefficient::one(),
                    _ => return Err(malformed("expected `<label> <re> <im>`")),
                };
                let label = PauliString::parse(fields[1], spec.d).map_err(|source| ParseError::Label { line, source })?;
                if label.n_sites() != spec.n_sites {
                    return Err(ParseError::SiteCount { line, expected: spec.n_sites, found: label.n_sites() });
                }
                if label.is_identity() {
                    return Err(ParseError::IdentityLabel { line });
                }
                if coeff.is_zero() {
                    return Err(ParseError::ZeroCoefficient { line });
                }
                zero_lines.insert(label.clone(), line);
                spec.add_term(label, coeff, env);
            }
            other => return Err(malformed(&format!("unknown directive `{other}`"))),
        }
    }
    let spec = spec.ok_or(ParseError::MissingHeader)?;
    if spec.is_empty() {
        return Err(ParseError::Empty);
    }
    if let Some(term) = spec.terms().find(|t| t.coeff.is_zero()) {
        return Err(ParseError::ZeroCoefficient { line: zero_lines[&term.label] });
    }
    Ok(spec)
}

/// Outcome of [`check_hermitian`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermiticityReport {
    pub passed: bool,
    pub violation: Option<(PauliString, String)>,
}

const HERMITIAN_TOL: f64 = 1e-12;

/// Checks `μ_{j,k} = ω^{⟨j,k⟩} μ*_{-j,-k}` for every system term (in the
/// `σ_{j,k}` basis) and that every label's partner `(-j,-k)` is present.
pub fn check_hermitian(spec: &HamiltonianSpec) -> HermiticityReport {
    for term in spec.terms() {
        let partner_label = term.label.negated();
        let Some(partner) = spec.get(&partner_label) else {
            return HermiticityReport {
                passed: false,
                violation: Some((term.label.clone(), format!("partner label {} is missing", partner_label.file_token()))),
            };
        };
        if partner.env_coupled != term.env_coupled {
            return HermiticityReport {
                passed: false,
                violation: Some((term.label.clone(), "partner label differs in environment coupling".into())),
            };
        }
        if term.env_coupled {
            continue;
        }
        let mu = spec.weyl_coefficient(term);
        let rhs = term.label.self_pairing().to_complex() * spec.weyl_coefficient(partner).conj();
        let scale = mu.norm().max(rhs.norm()).max(1.0);
        if (mu - rhs).norm() > HERMITIAN_TOL * scale {
            return HermiticityReport {
                passed: false,
                violation: Some((term.label.clone(), format!("coefficient {mu} does not match conjugate partner {rhs}"))),
            };
        }
    }
    HermiticityReport { passed: true, violation: None }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    pub label: PauliString,
    pub value: Coefficient,
    pub env_coupled: bool,
}

/// Right-hand side `r_k = ν_k / μ_k` over the labels `K` of `H`, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioVector {
    pub d: u32,
    pub n_sites: usize,
    pub entries: Vec<RatioEntry>,
}

impl RatioVector {
    pub fn labels(&self) -> impl Iterator<Item = &PauliString> {
        self.entries.iter().map(|e| &e.label)
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.value.value).collect()
    }

    /// Builds a ratio vector directly from labels and values.
    pub fn from_entries(d: u32, n_sites: usize, entries: Vec<(PauliString, Coefficient)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(label, value)| RatioEntry { label: label.basis(), value, env_coupled: false })
            .collect();
        Self { d, n_sites, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every entry is an exact rational with zero imaginary part.
    pub fn is_exact_real(&self) -> bool {
        self.entries.iter().all(|e| e.value.exact_real().is_some())
    }
}

pub fn target_ratio_vector(h: &HamiltonianSpec, target: &HamiltonianSpec) -> Result<RatioVector, TargetError> {
    if h.dim() != target.dim() || h.n_sites() != target.n_sites() {
        return Err(TargetError::ShapeMismatch);
    }
    for t in target.terms() {
        match h.get(&t.label) {
            None => return Err(TargetError::Unreachable(t.label.file_token())),
            Some(term) if term.env_coupled && !t.coeff.is_zero() => {
                return Err(TargetError::EnvironmentCoupled(t.label.file_token()))
            }
            Some(_) => {}
        }
    }
    let entries = h
        .terms()
        .map(|term| {
            let value = match target.get(&term.label) {
                Some(t) if !term.env_coupled => t.coeff.div(&term.coeff),
                _ => Coefficient::real(num_traits::Zero::zero()),
            };
            RatioEntry { label: term.label.clone(), value, env_coupled: term.env_coupled }
        })
        .collect();
    Ok(RatioVector { d: h.dim(), n_sites: h.n_sites(), entries })
}
