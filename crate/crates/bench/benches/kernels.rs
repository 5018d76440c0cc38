//! Microbenchmarks of the dynamics kernels: pulse compilation, sequence
//! sweeps, density-matrix integration, and the statevector engine.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qubench_bench::{cosine_pi_with_errors, reference_noise, square_pi_with_errors};
use qubench_core::dynamics::statevector::{statevector_apply, PauliNoise};
use qubench_core::dynamics::{
    evolve_density, pulse_propagator, run_sequence, DensitySystem, PairKind, Preparation,
    SequenceSpec,
};
use qubench_core::protocols::xeb::random_brickwork_circuit;

fn bench_pulse_compilation(c: &mut Criterion) {
    let np = reference_noise();
    let square = square_pi_with_errors().drive();
    let cosine = cosine_pi_with_errors().drive();
    c.bench_function("compile_square_pulse", |b| {
        b.iter(|| pulse_propagator(black_box(&square), &np).unwrap())
    });
    c.bench_function("compile_cosine_pulse_rk4", |b| {
        b.iter(|| pulse_propagator(black_box(&cosine), &np).unwrap())
    });
}

fn bench_sequence_sweep(c: &mut Criterion) {
    let np = reference_noise();
    let template = square_pi_with_errors();
    let seq = SequenceSpec::new(Preparation::Plus, PairKind::XxBar, (1..=300).collect()).unwrap();
    c.bench_function("xxbar_sweep_300_exact", |b| {
        b.iter(|| run_sequence(black_box(&seq), &template, &np, 0, 1).unwrap())
    });
    c.bench_function("xxbar_sweep_300_shots", |b| {
        b.iter(|| run_sequence(black_box(&seq), &template, &np, 800, 1).unwrap())
    });
}

fn bench_density_evolution(c: &mut Criterion) {
    let np = reference_noise();
    let system = DensitySystem::Qubit { noise: np };
    let rho0 = qubench_core::BlochState::plus().density();
    let cosine = cosine_pi_with_errors().drive();
    let pulses = vec![cosine; 2];
    c.bench_function("density_cosine_pair_rk4", |b| {
        b.iter(|| evolve_density(black_box(&pulses), &system, &rho0).unwrap())
    });
}

fn bench_statevector(c: &mut Criterion) {
    let circuit = random_brickwork_circuit(5, 12, 7);
    c.bench_function("statevector_5q_depth12", |b| {
        b.iter(|| statevector_apply(black_box(&circuit)).unwrap())
    });
    let noise = PauliNoise::uniform_single_qubit(5, 0.05).unwrap();
    c.bench_function("pauli_trajectory_100_samples", |b| {
        b.iter(|| {
            qubench_core::dynamics::statevector::pauli_trajectory_sample(
                black_box(&circuit),
                &noise,
                3,
                100,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_pulse_compilation,
    bench_sequence_sweep,
    bench_density_evolution,
    bench_statevector
);
criterion_main!(benches);
