//! Dynamical decoupling schemes built from generalized Pauli operators: the
//! operator algebra, the linear system and linear program that select pulse
//! counts, first-order verification and a state-vector simulator.

pub mod cli;
pub mod exec;
pub mod fixtures;
pub mod hamiltonian;
pub mod linear_system;
pub mod lp;
pub mod numeric;
pub mod pauli;
pub mod pipeline;
pub mod scheme;
pub mod simulator;
pub mod verifier;

pub use exec::Execution;
pub use hamiltonian::{parse_hamiltonian, parse_target, HamiltonianSpec};
pub use pauli::{PauliString, SpinLabel};
pub use pipeline::{solve, Method, SolveOptions, SolveOutcome};
pub use scheme::{parse_scheme, DecouplingScheme, OrderingPolicy};
pub use verifier::{check_decoupling, AverageReport};
