use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pauli_dd::fixtures;
use pauli_dd::simulator::{sweep, SweepGrid, SweepModel};
use pauli_dd::verifier::{oracle_discrepancy, EnvMode};
use pauli_dd::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fidelity_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("fidelity_sweep");
    group.sample_size(10);
    let scheme = fixtures::SWAP.printed_scheme();
    let grid = SweepGrid::new(vec![0.25, 0.5, 1.0], (1..=10).collect(), 4);
    for fock in [4, 8] {
        let model = SweepModel::Oscillators { fock_dim: fock };
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, fock), &fock, |b, _| {
                b.iter(|| sweep(&model, Some(&scheme), "eq17", &grid, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn oracle_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_batch");
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                mode.map(fixtures::ALL.to_vec(), |f| {
                    oracle_discrepancy(&f.hamiltonian_spec(), &f.printed_scheme(), EnvMode::DummyEnvironment).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, fidelity_sweep, oracle_batch);
criterion_main!(benches);
