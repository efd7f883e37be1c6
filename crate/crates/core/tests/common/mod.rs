//! Random problem generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use pauli_dd::numeric::Coefficient;
use pauli_dd::{DecouplingScheme, HamiltonianSpec, PauliString};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_label(rng: &mut StdRng, d: u32, n: usize) -> PauliString {
    let cols = ((d * d) as usize).pow(n as u32);
    PauliString::from_index(rng.random_range(1..cols), d, n)
}

fn random_coefficient(rng: &mut StdRng, d: u32) -> Coefficient {
    if d == 2 {
        // small dyadic values keep the exact path exercised
        let num: i64 = rng.random_range(-16..=16);
        let num = if num == 0 { 1 } else { num };
        Coefficient::real(BigRational::new(BigInt::from(num), BigInt::from(8)))
    } else {
        Coefficient::float(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }
}

/// Hermitian `H` with up to `n_terms` system labels and `n_env` environment
/// labels (each completed by its conjugate partner).
pub fn random_hermitian(rng: &mut StdRng, d: u32, n: usize, n_terms: usize, n_env: usize) -> HamiltonianSpec {
    let mut h = HamiltonianSpec::new(d, n);
    for i in 0..n_terms + n_env {
        let env = i >= n_terms;
        let label = random_label(rng, d, n);
        if h.get(&label).is_some() {
            continue;
        }
        let coeff = random_coefficient(rng, d);
        let partner = label.negated();
        if partner != label {
            let pv = label.self_pairing().to_complex() * coeff.value.conj();
            h.add_term(partner, Coefficient::float(pv), env);
        }
        h.add_term(label, coeff, env);
    }
    h
}

/// Target keeping each conjugate pair of system terms of `h` with a common
/// random real ratio in `[0, 1]` (zero drops the pair).
pub fn random_target(rng: &mut StdRng, h: &HamiltonianSpec) -> HamiltonianSpec {
    let mut t = HamiltonianSpec::new(h.dim(), h.n_sites());
    let mut seen: Vec<PauliString> = Vec::new();
    for term in h.terms().filter(|t| !t.env_coupled) {
        if seen.contains(&term.label) {
            continue;
        }
        let partner = term.label.negated();
        seen.push(term.label.clone());
        seen.push(partner.clone());
        let ratio = match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => rng.random_range(0.0..1.0),
        };
        if ratio == 0.0 {
            continue;
        }
        for label in [&term.label, &partner] {
            let src = h.get(label).expect("pair present");
            let coeff = match (src.coeff.exact_real(), h.dim()) {
                (Some(x), 2) if ratio == 1.0 || ratio == 0.5 => {
                    let r = BigRational::new(BigInt::from((ratio * 2.0) as i64), BigInt::from(2));
                    Coefficient::real(x * r)
                }
                _ => Coefficient::float(src.coeff.value * ratio),
            };
            t.add_term(label.clone(), coeff, false);
        }
    }
    t
}

/// Scheme of `m` random frames (repetitions allowed) with scaling `D`.
pub fn random_scheme(rng: &mut StdRng, d: u32, n: usize, m: usize, scaling: i64) -> DecouplingScheme {
    let cols = ((d * d) as usize).pow(n as u32);
    let order = (0..m).map(|_| PauliString::from_index(rng.random_range(0..cols), d, n)).collect();
    DecouplingScheme::from_order(order, BigRational::from_integer(scaling.into())).expect("non-empty order")
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
