//! Ordered decoupling sequences: frames `g_0..g_{m-1}`, the pulses
//! `p_0..p_m` that realize them, and the scheme text format.
//!
//! Pulses are derived as `p_0 = g_0`, `p_k = g_k g_{k-1}†` and
//! `p_m = g_{m-1}†`, so the final frame is the identity. Global phases are
//! dropped because they cancel in every conjugation.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linear_system::CountVector;
use crate::numeric::{parse_rational, to_f64};
use crate::pauli::{PauliError, PauliString};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("scheme has no frames")]
    Empty,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("declared length {declared} does not match {found} columns")]
    LengthMismatch { declared: usize, found: usize },
    #[error("site row count {found} does not match declared sites {expected}")]
    SiteRows { expected: usize, found: usize },
    #[error("label out of range: {0}")]
    Label(#[from] PauliError),
    #[error("explicit order does not match the counts")]
    OrderMismatch,
}

/// How frames with equal counts are laid out in time.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum OrderingPolicy {
    /// Ascending column index; identity frames come first.
    #[default]
    Lexicographic,
    /// The column order of the bundled printed schemes when the counts match
    /// one of them, lexicographic otherwise.
    Bundled,
    /// A caller-provided frame sequence with the same multiset as the counts.
    Explicit(Vec<PauliString>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingScheme {
    pub d: u32,
    pub n_sites: usize,
    pub counts: CountVector,
    /// Frames `g_0..g_{m-1}` (basis content, phase 0).
    pub order: Vec<PauliString>,
    /// Pulses `p_0..p_m` (basis content, phase 0).
    pub pulses: Vec<PauliString>,
    pub scaling: BigRational,
}

impl DecouplingScheme {
    pub fn m(&self) -> usize {
        self.order.len()
    }

    pub fn scaling_f64(&self) -> f64 {
        to_f64(&self.scaling)
    }

    /// Builds a scheme from an explicit frame sequence.
    pub fn from_order(order: Vec<PauliString>, scaling: BigRational) -> Result<Self, SchemeError> {
        let first = order.first().ok_or(SchemeError::Empty)?;
        let (d, n_sites) = (first.dim(), first.n_sites());
        let pairs = order.iter().map(|g| (g.basis(), 1)).collect();
        let counts = CountVector::from_counts(d, n_sites, pairs, scaling.clone());
        let order: Vec<PauliString> = order.iter().map(PauliString::basis).collect();
        let pulses = derive_pulses(&order)?;
        Ok(Self { d, n_sites, counts, order, pulses, scaling })
    }

    /// Frames reconstructed from the pulses: `g_k ∝ p_k p_{k-1} ⋯ p_0`.
    /// The returned list has `m + 1` entries; the last is the closing frame.
    pub fn reconstruct_frames(&self) -> Vec<PauliString> {
        let mut frames = Vec::with_capacity(self.pulses.len());
        let mut g = PauliString::identity(self.d, self.n_sites);
        for p in &self.pulses {
            g = p.product(&g).expect("pulses share the scheme shape");
            frames.push(g.clone());
        }
        frames
    }

    /// Scheme file: `dim`, `sites`, `scaling p/q`, `length m`, then one row per site.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dim {}", self.d);
        let _ = writeln!(out, "sites {}", self.n_sites);
        let _ = writeln!(out, "scaling {}/{}", self.scaling.numer(), self.scaling.denom());
        let _ = writeln!(out, "length {}", self.m());
        for site in 0..self.n_sites {
            let row: Vec<String> = self.order.iter().map(|g| site_token(g, site)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn site_token(g: &PauliString, site: usize) -> String {
    let s = g.sites()[site];
    if g.dim() == 2 {
        s.digit(2).to_string()
    } else {
        format!("{}.{}", s.j, s.k)
    }
}

fn derive_pulses(order: &[PauliString]) -> Result<Vec<PauliString>, SchemeError> {
    let mut pulses = Vec::with_capacity(order.len() + 1);
    let mut prev: Option<&PauliString> = None;
    for g in order {
        let p = match prev {
            None => g.basis(),
            Some(prev) => g.product(&prev.adjoint())?.basis(),
        };
        pulses.push(p);
        prev = Some(g);
    }
    let last = prev.ok_or(SchemeError::Empty)?;
    pulses.push(last.adjoint().basis());
    Ok(pulses)
}

/// Lays the counts out in time under `policy` and derives the pulses.
pub fn materialize(counts: &CountVector, policy: &OrderingPolicy) -> Result<DecouplingScheme, SchemeError> {
    if counts.m == 0 {
        return Err(SchemeError::Empty);
    }
    let lexicographic = || -> Vec<PauliString> {
        counts
            .counts
            .iter()
            .flat_map(|(label, c)| std::iter::repeat_n(label.clone(), *c as usize))
            .collect()
    };
    let order = match policy {
        OrderingPolicy::Lexicographic => lexicographic(),
        OrderingPolicy::Bundled => crate::fixtures::printed_order_for(counts).unwrap_or_else(lexicographic),
        OrderingPolicy::Explicit(order) => {
            let check = CountVector::from_counts(
                counts.d,
                counts.n_sites,
                order.iter().map(|g| (g.basis(), 1)).collect(),
                counts.scaling.clone(),
            );
            if check.counts != counts.counts {
                return Err(SchemeError::OrderMismatch);
            }
            order.iter().map(PauliString::basis).collect()
        }
    };
    let pulses = derive_pulses(&order)?;
    Ok(DecouplingScheme {
        d: counts.d,
        n_sites: counts.n_sites,
        counts: counts.clone(),
        order,
        pulses,
        scaling: counts.scaling.clone(),
    })
}

/// Parses the scheme file format produced by [`DecouplingScheme::serialize`].
pub fn parse_scheme(text: &str) -> Result<DecouplingScheme, SchemeError> {
    let mut d = None;
    let mut n_sites = None;
    let mut scaling = None;
    let mut length = None;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let malformed = |reason: &str| SchemeError::Malformed { line, reason: reason.to_string() };
        let value = || fields.get(1).copied().filter(|_| fields.len() == 2).ok_or_else(|| malformed("expected one value"));
        match fields[0] {
            "dim" => d = Some(value()?.parse::<u32>().map_err(|_| malformed("bad dimension"))?),
            "sites" => n_sites = Some(value()?.parse::<usize>().map_err(|_| malformed("bad site count"))?),
            "scaling" => {
                let s = parse_rational(value()?).ok_or_else(|| malformed("bad scaling"))?;
                if s.is_negative() {
                    return Err(malformed("scaling must be non-negative"));
                }
                scaling = Some(s);
            }
            "length" => length = Some(value()?.parse::<usize>().map_err(|_| malformed("bad length"))?),
            _ => rows.push((line, fields.iter().map(|s| s.to_string()).collect())),
        }
    }
    let d = d.ok_or(SchemeError::Malformed { line: 0, reason: "missing `dim`".into() })?;
    let n_sites = n_sites.ok_or(SchemeError::Malformed { line: 0, reason: "missing `sites`".into() })?;
    let scaling = scaling.ok_or(SchemeError::Malformed { line: 0, reason: "missing `scaling`".into() })?;
    if d < 2 {
        return Err(PauliError::DimensionTooSmall(d).into());
    }
    if rows.len() != n_sites {
        return Err(SchemeError::SiteRows { expected: n_sites, found: rows.len() });
    }
    let m = rows[0].1.len();
    if m == 0 {
        return Err(SchemeError::Empty);
    }
    for (row, (_, tokens)) in rows.iter().enumerate() {
        if tokens.len() != m {
            return Err(SchemeError::Ragged { row: row + 1, expected: m, found: tokens.len() });
        }
    }
    if let Some(declared) = length {
        if declared != m {
            return Err(SchemeError::LengthMismatch { declared, found: m });
        }
    }
    let order = (0..m)
        .map(|col| {
            let column: Vec<&str> = rows.iter().map(|(_, t)| t[col].as_str()).collect();
            let text = if d == 2 { column.concat() } else { column.join("x") };
            PauliString::parse(&text, d)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if order.iter().any(|g| g.n_sites() != n_sites) {
        return Err(SchemeError::Malformed { line: 0, reason: "column does not have one label per site".into() });
    }
    DecouplingScheme::from_order(order, scaling)
}

/// The trivial scheme `{1}` with scaling 1.
pub fn identity_scheme(d: u32, n_sites: usize) -> DecouplingScheme {
    DecouplingScheme::from_order(vec![PauliString::identity(d, n_sites)], BigRational::one())
        .expect("non-empty order")
}

/// True when `scaling` is zero (no evolution kept).
pub fn is_null_scaling(s: &DecouplingScheme) -> bool {
    s.scaling.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn qubits(digits: &[u32]) -> PauliString {
        PauliString::from_qubit_digits(digits).unwrap()
    }

    const EQ14: &str = "dim 2\nsites 2\nscaling 3/1\nlength 12\n0 0 0 1 1 1 2 2 2 3 3 3\n0 0 0 1 2 3 1 2 3 1 2 3\n";

    #[test]
    fn parses_two_qubit_protection() {
        let s = parse_scheme(EQ14).unwrap();
        assert_eq!(s.m(), 12);
        assert_eq!(s.scaling, q(3, 1));
        assert_eq!(s.counts.count_of(&PauliString::identity(2, 2)), 3);
        assert_eq!(s.serialize(), EQ14);
    }

    #[test]
    fn lexicographic_materialization_matches_printed_layout() {
        let s = parse_scheme(EQ14).unwrap();
        let again = materialize(&s.counts, &OrderingPolicy::Lexicographic).unwrap();
        assert_eq!(again.order, s.order);
    }

    #[test]
    fn identity_column() {
        let s = parse_scheme("dim 2\nsites 3\nscaling 1\n0\n0\n0\n").unwrap();
        assert_eq!(s.m(), 1);
        assert!(s.order[0].is_identity());
        assert_eq!(s.pulses.len(), 2);
        assert!(s.pulses.iter().all(|p| p.is_identity()));
        assert_eq!(s, identity_scheme(2, 3));
    }

    #[test]
    fn chain_scheme_frames() {
        let text = "dim 2\nsites 4\nscaling 2\n0 0 1 0\n0 0 1 1\n0 0 0 1\n0 0 0 0\n";
        let s = parse_scheme(text).unwrap();
        assert_eq!(s.m(), 4);
        assert_eq!(s.scaling, q(2, 1));
        assert_eq!(s.order[2], qubits(&[1, 1, 0, 0]));
        assert_eq!(s.order[3], qubits(&[0, 1, 1, 0]));
    }

    #[test]
    fn swap_scheme_pulses_use_only_x_and_y() {
        let order = vec![qubits(&[0, 0]), qubits(&[1, 1]), qubits(&[3, 3]), qubits(&[2, 2])];
        let s = DecouplingScheme::from_order(order, q(1, 1)).unwrap();
        let digits: Vec<String> = s.pulses.iter().map(|p| p.file_token()).collect();
        assert_eq!(digits, vec!["00", "11", "22", "11", "22"]);
        for p in &s.pulses {
            assert!(p.sites().iter().all(|l| matches!(l.digit(2), 0..=2)));
        }
    }

    #[test]
    fn frames_reconstruct_and_close() {
        let s = parse_scheme(EQ14).unwrap();
        let frames = s.reconstruct_frames();
        assert_eq!(&frames[..s.m()], &s.order[..]);
        assert!(frames[s.m()].is_identity());
    }

    #[test]
    fn qutrit_scheme_round_trip() {
        let text = "dim 3\nsites 2\nscaling 5/2\nlength 3\n0.0 1.2 2.1\n0.0 0.1 1.1\n";
        let s = parse_scheme(text).unwrap();
        assert_eq!(s.serialize(), text);
        let frames = s.reconstruct_frames();
        assert_eq!(&frames[..3], &s.order[..]);
        assert!(frames[3].is_identity());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_scheme("dim 2\nsites 2\nscaling 1\n0 1\n0\n"),
            Err(SchemeError::Ragged { row: 2, .. })
        ));
        assert!(matches!(parse_scheme("dim 2\nsites 1\nscaling 1\n4\n"), Err(SchemeError::Label(_))));
        assert!(matches!(
            parse_scheme("dim 2\nsites 1\nscaling 1\nlength 3\n0 1\n"),
            Err(SchemeError::LengthMismatch { declared: 3, found: 2 })
        ));
        assert!(matches!(parse_scheme("dim 2\nsites 2\nscaling 1\n0 1\n"), Err(SchemeError::SiteRows { .. })));
        assert!(matches!(parse_scheme("dim 2\nsites 1\n0\n"), Err(SchemeError::Malformed { .. })));
    }

    #[test]
    fn explicit_order_must_match_counts() {
        let s = parse_scheme(EQ14).unwrap();
        let mut reversed = s.order.clone();
        reversed.reverse();
        let r = materialize(&s.counts, &OrderingPolicy::Explicit(reversed.clone())).unwrap();
        assert_eq!(r.order, reversed);
        reversed.pop();
        assert_eq!(
            materialize(&s.counts, &OrderingPolicy::Explicit(reversed)),
            Err(SchemeError::OrderMismatch)
        );
    }
}
