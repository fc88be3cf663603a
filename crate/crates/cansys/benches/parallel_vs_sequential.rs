//! Sequential vs parallel timings for the scan-style operations.
//!
//! Each group runs the same workload under both execution modes; on a
//! multi-core host the parallel rows should pull ahead once the work
//! per item dominates the fork overhead. With the `parallel` feature
//! disabled both rows time the same sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use cansys::extension::{eigenvalues_in, SelfAdjointBvp};
use cansys::hamiltonian::{builtin, BuiltinParams};
use cansys::par::ExecMode;
use cansys::quadrature::GaussLegendre;
use cansys::resolvent::hs_matrix;
use cansys::weyl::{defect_constancy_scan, BoundaryAngle, Truncated};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn random_bvp(length: f64, cells: usize) -> SelfAdjointBvp {
    let field = builtin(
        "random-psd",
        BuiltinParams {
            length: Some(length),
            cells: Some(cells),
            rate: None,
            seed: Some(7),
        },
    )
    .unwrap();
    SelfAdjointBvp::over_full_field(field, BoundaryAngle::pi(), BoundaryAngle::pi()).unwrap()
}

fn bench_hs_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("hs-matrix-assembly");
    group.sample_size(20);
    let bvp = random_bvp(1.0, 64);
    let rule = GaussLegendre::new(12);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, "64-cells-12-nodes"), |b| {
            b.iter(|| hs_matrix(black_box(&bvp), 0.37, &rule, mode).unwrap())
        });
    }
    group.finish();
}

fn bench_eigenvalue_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenvalue-grid-scan");
    group.sample_size(20);
    let bvp = random_bvp(1.0, 48);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, "2048-points"), |b| {
            b.iter(|| eigenvalues_in(black_box(&bvp), (-30.0, 30.0), 2048, 1e-10, mode).unwrap())
        });
    }
    group.finish();
}

fn bench_defect_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("defect-z-scan");
    group.sample_size(20);
    let field = builtin(
        "random-psd",
        BuiltinParams {
            length: Some(40.0),
            cells: Some(160),
            rate: None,
            seed: Some(3),
        },
    )
    .unwrap();
    let z_list: Vec<Complex64> = (0..16)
        .map(|k| Complex64::new(-2.0 + 0.25 * k as f64, 1.0))
        .collect();
    let schedule = [5.0, 10.0, 20.0, 40.0];
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, "16-points"), |b| {
            b.iter(|| {
                defect_constancy_scan(&Truncated(black_box(&field)), &z_list, &schedule, 1e-6, mode)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_hs_assembly,
    bench_eigenvalue_scan,
    bench_defect_scan
);
criterion_main!(benches);
