//! The four bundled example problems and their printed schemes.

use std::io;
use std::path::{Path, PathBuf};

use crate::hamiltonian::{parse_hamiltonian, parse_target, HamiltonianSpec};
use crate::linear_system::CountVector;
use crate::pauli::PauliString;
use crate::scheme::{parse_scheme, DecouplingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    /// Short identifier of the printed scheme (used as `scheme_id` in CSV output).
    pub scheme_id: &'static str,
    pub description: &'static str,
    pub hamiltonian: &'static str,
    pub target: &'static str,
    pub scheme: &'static str,
}

impl Fixture {
    pub fn hamiltonian_spec(&self) -> HamiltonianSpec {
        parse_hamiltonian(self.hamiltonian).expect("bundled Hamiltonian parses")
    }

    pub fn target_spec(&self) -> HamiltonianSpec {
        parse_target(self.target).expect("bundled target parses")
    }

    pub fn printed_scheme(&self) -> DecouplingScheme {
        parse_scheme(self.scheme).expect("bundled scheme parses")
    }
}

pub const GENERAL: Fixture = Fixture {
    name: "general",
    scheme_id: "eq14",
    description: "two coupled qubits with general environment coupling; keep the interaction",
    hamiltonian: include_str!("../fixtures/general.ham"),
    target: include_str!("../fixtures/general.target"),
    scheme: include_str!("../fixtures/general.scheme"),
};

pub const SWAP: Fixture = Fixture {
    name: "swap",
    scheme_id: "eq17",
    description: "Heisenberg exchange protected against oscillator baths",
    hamiltonian: include_str!("../fixtures/swap.ham"),
    target: include_str!("../fixtures/swap.target"),
    scheme: include_str!("../fixtures/swap.scheme"),
};

pub const DIAGONAL: Fixture = Fixture {
    name: "diagonal",
    scheme_id: "ring",
    description: "four-qubit ZZ ring; remove both diagonal couplings",
    hamiltonian: include_str!("../fixtures/diagonal.ham"),
    target: include_str!("../fixtures/diagonal.target"),
    scheme: include_str!("../fixtures/diagonal.scheme"),
};

pub const CHAIN: Fixture = Fixture {
    name: "chain",
    scheme_id: "chain",
    description: "four-qubit XX+YY chain; halve the outer couplings",
    hamiltonian: include_str!("../fixtures/chain.ham"),
    target: include_str!("../fixtures/chain.target"),
    scheme: include_str!("../fixtures/chain.scheme"),
};

pub const ALL: [Fixture; 4] = [GENERAL, SWAP, DIAGONAL, CHAIN];

pub fn by_name(name: &str) -> Option<Fixture> {
    ALL.iter().copied().find(|f| f.name == name || f.scheme_id == name)
}

/// Printed frame order of a bundled scheme with exactly these counts.
pub fn printed_order_for(counts: &CountVector) -> Option<Vec<PauliString>> {
    ALL.iter()
        .map(Fixture::printed_scheme)
        .find(|s| s.d == counts.d && s.n_sites == counts.n_sites && s.counts.counts == counts.counts)
        .map(|s| s.order)
}

/// Writes `<name>.ham`, `<name>.target` and `<name>.scheme` for every fixture.
pub fn export(dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in ALL {
        for (ext, body) in [("ham", f.hamiltonian), ("target", f.target), ("scheme", f.scheme)] {
            let path = dir.join(format!("{}.{ext}", f.name));
            std::fs::write(&path, body)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{materialize, OrderingPolicy};

    #[test]
    fn fixtures_parse() {
        for f in ALL {
            let h = f.hamiltonian_spec();
            let t = f.target_spec();
            let s = f.printed_scheme();
            assert_eq!((h.dim(), h.n_sites()), (t.dim(), t.n_sites()));
            assert_eq!((s.d, s.n_sites), (h.dim(), h.n_sites()));
        }
    }

    #[test]
    fn bundled_policy_restores_orders() {
        for f in ALL {
            let s = f.printed_scheme();
            let again = materialize(&s.counts, &OrderingPolicy::Bundled).unwrap();
            assert_eq!(again.order, s.order, "{}", f.name);
        }
    }

    #[test]
    fn lookup_by_name_or_scheme_id() {
        assert_eq!(by_name("eq17"), Some(SWAP));
        assert_eq!(by_name("general"), Some(GENERAL));
        assert_eq!(by_name("nope"), None);
    }
}
