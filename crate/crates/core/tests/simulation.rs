mod common;

use common::max_abs;
use nalgebra::DMatrix;
use num_complex::Complex64;
use pauli_dd::fixtures;
use pauli_dd::scheme::identity_scheme;
use pauli_dd::simulator::*;
use pauli_dd::Execution;

const LAMBDAS: [f64; 3] = [0.25, 0.5, 1.0];

fn fidelity_at(lambda: f64, n: usize, fock: usize, scheme: Option<&pauli_dd::DecouplingScheme>) -> f64 {
    let s = scheme.cloned().unwrap_or_else(|| identity_scheme(2, 2));
    let config = SimulationConfig { fock_dim: fock, use_decoupling: scheme.is_some(), ..SimulationConfig::new(lambda, n) };
    simulate(&config, &s).unwrap().fidelity
}

#[test]
fn pulsed_evolution_is_unitary() {
    for scheme in [fixtures::GENERAL.printed_scheme(), fixtures::SWAP.printed_scheme()] {
        for fock in [2, 3] {
            let h = build_oscillator_model(1.0, fock).unwrap();
            let prop = Propagator::new(&h).unwrap();
            let u = evolve_unitary(&prop, &scheme, 3, DEFAULT_TAU, fock * fock).unwrap();
            let dim = u.nrows();
            assert!(max_abs(&(u.adjoint() * &u - DMatrix::<Complex64>::identity(dim, dim))) < 1e-10);
        }
    }
}

#[test]
fn norm_is_conserved_at_every_pulse() {
    let h = build_oscillator_model(1.0, 4).unwrap();
    let prop = Propagator::new(&h).unwrap();
    let psi = with_ground_environment(&basis_state(4, 1), 16);
    let mut boundaries = 0;
    let scheme = fixtures::GENERAL.printed_scheme();
    evolve_state_observed(&prop, &scheme, 2, DEFAULT_TAU, 16, &psi, |state| {
        boundaries += 1;
        assert!((state.norm() - 1.0).abs() < 1e-12);
    })
    .unwrap();
    assert_eq!(boundaries, 2 * (scheme.m() + 1));
}

#[test]
fn pulse_interval_follows_scheme_parameters() {
    for scheme in [fixtures::GENERAL.printed_scheme(), fixtures::SWAP.printed_scheme()] {
        for n in 1..=10 {
            let dt = pulse_interval(&scheme, n, DEFAULT_TAU);
            assert_eq!(dt, scheme.scaling_f64() * DEFAULT_TAU / (scheme.m() * n) as f64);
            let grid = SweepGrid::new(vec![0.5], vec![n], 4);
            let rows = sweep(&SweepModel::Oscillators { fock_dim: 2 }, Some(&scheme), "s", &grid, Execution::Sequential)
                .unwrap();
            assert_eq!(rows[0].dt, dt);
        }
    }
    // both bundled schemes space their pulses by τ/(4n)
    let general = pulse_interval(&fixtures::GENERAL.printed_scheme(), 1, DEFAULT_TAU);
    assert!((general - DEFAULT_TAU / 4.0).abs() < 1e-15);
}

#[test]
fn zero_coupling_swap_scheme_is_exact_for_every_n() {
    let s = fixtures::SWAP.printed_scheme();
    for n in 1..=10 {
        assert!((fidelity_at(0.0, n, 2, Some(&s)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_scheme_once_is_free_evolution() {
    let h = build_oscillator_model(0.5, 3).unwrap();
    let prop = Propagator::new(&h).unwrap();
    let u = evolve_unitary(&prop, &identity_scheme(2, 2), 1, DEFAULT_TAU, 9).unwrap();
    assert!(max_abs(&(u - prop.unitary(DEFAULT_TAU))) < 1e-12);
}

#[test]
fn general_scheme_improves_monotonically() {
    let s = fixtures::GENERAL.printed_scheme();
    let values: Vec<f64> = (1..=10).map(|n| fidelity_at(0.5, n, DEFAULT_FOCK_DIM, Some(&s))).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values[9] > 0.9999);
}

#[test]
fn convergence_within_slack_on_bundled_grid() {
    let model = SweepModel::Oscillators { fock_dim: DEFAULT_FOCK_DIM };
    let grid = SweepGrid::new(LAMBDAS.to_vec(), (1..=10).collect(), 4);
    for scheme in [fixtures::GENERAL.printed_scheme(), fixtures::SWAP.printed_scheme()] {
        let rows = sweep(&model, Some(&scheme), "s", &grid, Execution::Parallel).unwrap();
        for chunk in rows.chunks(10) {
            assert!(chunk.windows(2).all(|w| w[1].fidelity >= w[0].fidelity - 1e-3));
            assert!(chunk[9].fidelity > 0.999);
        }
    }
}

#[test]
fn regression_baselines() {
    // recorded from the first build at λ = 0.5, n = 4, fock_dim = 8, |01⟩
    let general = fidelity_at(0.5, 4, 8, Some(&fixtures::GENERAL.printed_scheme()));
    let swap = fidelity_at(0.5, 4, 8, Some(&fixtures::SWAP.printed_scheme()));
    let none = fidelity_at(0.5, 4, 8, None);
    assert!((general - 0.9996031879072695).abs() < 1e-9, "{general}");
    assert!((swap - 0.9999234717221128).abs() < 1e-9, "{swap}");
    assert!((none - 0.9655303045578124).abs() < 1e-9, "{none}");
    assert!(none < general && none < swap);
}

#[test]
fn truncation_is_stable() {
    let s = fixtures::SWAP.printed_scheme();
    let g = fixtures::GENERAL.printed_scheme();
    let initial = basis_state(4, 1);
    for lambda in LAMBDAS {
        let runs: Vec<Vec<f64>> = [DEFAULT_FOCK_DIM, 2 * DEFAULT_FOCK_DIM]
            .iter()
            .map(|&fock| {
                let model = JointModel::oscillators(lambda, fock).unwrap();
                let prop = Propagator::new(&model.hamiltonian).unwrap();
                let mut out = Vec::new();
                for scheme in [Some(&s), Some(&g), None] {
                    for n in [1, 10] {
                        out.push(run_point(&model, &prop, scheme, n, DEFAULT_TAU, &initial).unwrap().1);
                    }
                }
                out
            })
            .collect();
        for (a, b) in runs[0].iter().zip(&runs[1]) {
            assert!((a - b).abs() < 1e-6, "λ={lambda}: {a} vs {b}");
        }
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree_byte_for_byte() {
    let model = SweepModel::Oscillators { fock_dim: 3 };
    let grid = SweepGrid::new(vec![1.0, 0.25, 0.5], vec![3, 1, 2], 4);
    let s = fixtures::SWAP.printed_scheme();
    let a = to_csv(&sweep(&model, Some(&s), "eq17", &grid, Execution::Sequential).unwrap());
    let b = to_csv(&sweep(&model, Some(&s), "eq17", &grid, Execution::Parallel).unwrap());
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("0.25,1,"));
    assert!(lines[9].starts_with("1,3,"));
}

#[test]
fn spec_models_simulate() {
    let f = fixtures::GENERAL;
    let model = SweepModel::Spec { hamiltonian: f.hamiltonian_spec(), target: f.target_spec() };
    let grid = SweepGrid::new(vec![0.0, 0.5], vec![1, 8], 4);
    let s = f.printed_scheme();
    let rows = sweep(&model, Some(&s), "eq14", &grid, Execution::Sequential).unwrap();
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.fidelity)));
    assert!(rows[1].fidelity > rows[0].fidelity);
    let baseline = sweep(&model, None, "none", &grid, Execution::Sequential).unwrap();
    assert!(rows[3].fidelity > baseline[3].fidelity);
}

#[test]
fn shape_mismatch_is_reported() {
    let grid = SweepGrid::new(vec![0.5], vec![1], 4);
    let s = identity_scheme(2, 3);
    let err = sweep(&SweepModel::Oscillators { fock_dim: 2 }, Some(&s), "x", &grid, Execution::Sequential).unwrap_err();
    assert_eq!(err, SimulationError::SchemeShape { scheme: 8, model: 4 });
}
