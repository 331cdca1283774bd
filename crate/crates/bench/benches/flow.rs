use std::hint::black_box;
use std::sync::Arc;

use collarflow::duhamel::HeatPropagator;
use collarflow::flow::{rdtf_rhs, LinearOperator, Stepper};
use collarflow::geometry::{perturb, riemann_ricci, Background, BackgroundGeometry, SClosure};
use collarflow::{Anisotropy, Boundary, CollarChart, FlowConfig, MetricState, Mode};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn torus(nx: usize) -> Arc<BackgroundGeometry> {
    Arc::new(BackgroundGeometry::hyperbolic(CollarChart::torus(3, 1e-3, 0.5, nx).unwrap()).unwrap())
}

fn wave() -> Arc<BackgroundGeometry> {
    let c = CollarChart::new(Mode::Torus, 3, 1e-2, 0.5, 48, 16, Anisotropy::OneTangential).unwrap();
    Arc::new(BackgroundGeometry::new(c, Background::TangentialWave { beta: 0.2 }).unwrap())
}

fn perturbed(bg: &Arc<BackgroundGeometry>) -> MetricState {
    MetricState::unperturbed(bg.clone()).with_perturbation(perturb::random_smooth(bg, 0.01, 1))
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rdtf_rhs");
    for (name, bg) in [("isotropic_128", torus(128)), ("one_tangential_48x16", wave())] {
        let g = perturbed(&bg);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rdtf_rhs(black_box(&g), SClosure::OneSided).unwrap())
        });
    }
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let bg = wave();
    let g = perturbed(&bg);
    c.bench_function("riemann_ricci/one_tangential_48x16", |b| b.iter(|| riemann_ricci(black_box(&g)).unwrap()));
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("imex_step");
    for nx in [64, 128, 256] {
        let bg = torus(nx);
        let g = perturbed(&bg);
        let stepper = Stepper::new(bg.clone(), FlowConfig::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nx), &g, |b, g| {
            b.iter(|| stepper.step(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn assemble(c: &mut Criterion) {
    let bg = wave();
    c.bench_function("assemble_and_factor/one_tangential_48x16", |b| {
        b.iter(|| {
            let op = LinearOperator::assemble(black_box(&bg), Boundary::Dirichlet);
            HeatPropagator::from_operator(&op, 1e-3).unwrap()
        })
    });
}

criterion_group!(benches, rhs, curvature, step, assemble);
criterion_main!(benches);
