use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mimetic_ll::linalg::SolverConfig;
use mimetic_ll::mesh::{build_polygonal_mesh_seeded, build_uniform_quad_mesh, Rect};
use mimetic_ll::mimetic::{InnerProductConfig, LocalInnerProduct, MimeticOperators};
use mimetic_ll::stray::DemagKernel;
use mimetic_ll::{CellVectorField, LLSolver, MaterialParams, ThetaScheme};
use std::hint::black_box;

fn local_matrices(c: &mut Criterion) {
    let mesh = build_polygonal_mesh_seeded(32, 7).expect("mesh");
    let cfg = InnerProductConfig::default();
    c.bench_function("local_inner_products_polygonal_32", |b| {
        b.iter(|| {
            for cell in 0..mesh.num_cells() {
                black_box(LocalInnerProduct::new(&mesh, cell, &cfg).expect("local"));
            }
        })
    });
}

fn stray_fft(c: &mut Criterion) {
    let mut g = c.benchmark_group("demag_fft_apply");
    for n in [32usize, 64, 128] {
        let kernel = DemagKernel::new([n, n, 1], [1.0, 1.0, 0.5]).expect("kernel");
        let m: Vec<[f64; 3]> = (0..n * n)
            .map(|i| {
                let a = i as f64 * 0.01;
                [a.cos(), a.sin(), 0.0]
            })
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| black_box(kernel.apply_fft(m).expect("apply")))
        });
    }
    g.finish();
}

fn implicit_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("implicit_step");
    g.sample_size(10);
    for n in [32usize, 64] {
        let mesh = build_uniform_quad_mesh(n, n, Rect::unit()).expect("mesh");
        let m0 = CellVectorField(
            mesh.cells
                .iter()
                .map(|cell| {
                    let [x, y] = cell.centroid;
                    let a = 6.0 * x + 3.0 * y;
                    [a.cos(), a.sin(), 0.3]
                })
                .collect(),
        );
        let mut solver = LLSolver::new(
            mesh,
            &InnerProductConfig::default(),
            MaterialParams::default(),
            ThetaScheme::implicit(1e-4),
            SolverConfig::default(),
        )
        .expect("solver");
        let s0 = solver.initial_state(m0, 0.0).expect("state");
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| black_box(solver.step(&s0).expect("step")))
        });
    }
    g.finish();
}

fn operators_setup(c: &mut Criterion) {
    let mesh = build_uniform_quad_mesh(64, 64, Rect::unit()).expect("mesh");
    c.bench_function("mimetic_operators_uniform_64", |b| {
        b.iter(|| black_box(MimeticOperators::new(&mesh, &InnerProductConfig::default()).expect("ops")))
    });
}

criterion_group!(benches, local_matrices, operators_setup, stray_fft, implicit_step);
criterion_main!(benches);
