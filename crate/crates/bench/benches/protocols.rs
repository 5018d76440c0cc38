//! Whole-protocol benchmarks at reduced sizes: full deterministic runs,
//! randomized-benchmarking sweeps, tomography reconstructions, and one
//! gate-set fit.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qubench_bench::{reference_noise, square_pi_with_errors};
use qubench_core::protocols::{db_run, rb_run, CliffordGroup1Q, DbConfig, PulseOracle};
use qubench_core::tomography::{
    dcqd_single_qubit, gst_fit, gst_simulate_dataset, sqpt_channel, DcqdConfig, GstDesign,
    GstModel,
};
use qubench_core::QuantumChannel;

fn bench_db(c: &mut Criterion) {
    let config = DbConfig {
        template: square_pi_with_errors(),
        noise: reference_noise(),
        repetitions: (1..=300).collect(),
        shots: 800,
        seed: 1,
        include_ur6: false,
    };
    c.bench_function("db_full_run_300", |b| {
        b.iter(|| db_run(black_box(&config)).unwrap())
    });
}

fn bench_rb(c: &mut Criterion) {
    let group = CliffordGroup1Q::new().unwrap();
    let template = qubench_core::PulseSpec::square_pi(qubench_core::Axis::X, 1);
    let oracle = PulseOracle::new(&group, &template, &reference_noise(), 0.0, 0.0).unwrap();
    let depths = qubench_core::protocols::default_depths();
    c.bench_function("rb_30seq_m700_shots", |b| {
        b.iter(|| rb_run(&group, black_box(&oracle), &depths, 30, 800, 1).unwrap())
    });
}

fn bench_tomography(c: &mut Criterion) {
    let u = qubench_core::protocols::clifford::rotation_unitary(0.3, 1.1);
    let dep = qubench_core::depolarizing_channel(0.1, 1).unwrap();
    let ch = QuantumChannel::from_unitary(&u).unwrap().then(&dep).unwrap();
    c.bench_function("sqpt_single_qubit", |b| {
        b.iter(|| sqpt_channel(black_box(&ch)).unwrap())
    });
    c.bench_function("dcqd_single_qubit", |b| {
        b.iter(|| dcqd_single_qubit(black_box(&ch), &DcqdConfig::standard()).unwrap())
    });
}

fn bench_gst(c: &mut Criterion) {
    let truth = GstModel::ideal();
    let design = GstDesign::standard();
    let data = gst_simulate_dataset(&truth, &design, 2000, 1).unwrap();
    c.bench_function("gst_fit_standard_40iters", |b| {
        b.iter(|| gst_fit(&design, black_box(&data), 0, 1, 40).unwrap())
    });
}

criterion_group!(benches, bench_db, bench_rb, bench_tomography, bench_gst);
criterion_main!(benches);
