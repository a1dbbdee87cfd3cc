use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mdpl_core::dsl::parse_domain;
use mdpl_core::ground::{build_graph, DEFAULT_STATE_CAP};
use mdpl_core::model::{DomainSpec, MdpGraph, Objective, Sense};
use mdpl_core::prism::emit::emit_with;
use mdpl_core::prism::EmitMode;
use mdpl_core::refine::refine;
use mdpl_core::reward::annotate;
use mdpl_core::sim::{simulate, Executor};
use mdpl_core::solver::solve;
use mdpl_core::{bundled, Exec};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn load(name: &str) -> (DomainSpec, MdpGraph) {
    let d = parse_domain(bundled::get(name).unwrap()).unwrap();
    let g = refine(build_graph(&d, DEFAULT_STATE_CAP).unwrap());
    (d, g)
}

fn bench_annotate(c: &mut Criterion) {
    let mut group = c.benchmark_group("annotate");
    group.sample_size(10);
    for name in ["structure_t3", "gripper_t4"] {
        let (d, g) = load(name);
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, name), &g, |b, g| {
                b.iter(|| annotate(black_box(g.clone()), &d, Sense::Max, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_emit(c: &mut Criterion) {
    let mut group = c.benchmark_group("emit");
    group.sample_size(10);
    let (d, g) = load("structure_t3");
    let g = annotate(g, &d, Sense::Min, Exec::Parallel).unwrap();
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, "structure_t3"), |b| {
            b.iter(|| emit_with(black_box(&g), &d, EmitMode::Factored, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (name, objective) in [
        ("structure_t3", Objective::Rmax),
        ("gripper_t4", Objective::Pmax),
    ] {
        let (d, g) = load(name);
        let g = annotate(g, &d, objective.sense(), Exec::Parallel).unwrap();
        for (label, exec) in MODES {
            group.bench_function(
                BenchmarkId::new(label, format!("{name}/{objective}")),
                |b| b.iter(|| solve(black_box(&g), &d, objective, None, exec).unwrap()),
            );
        }
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let (d, g) = load("agv_t2");
    let g = annotate(g, &d, Sense::Min, Exec::Parallel).unwrap();
    let p = solve(&g, &d, Objective::Pmax, None, Exec::Parallel)
        .unwrap()
        .policy;
    let faulty = Executor::faulty(0.4, 1);
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, "agv_t2/10000"), |b| {
            b.iter(|| {
                simulate(black_box(&g), &d, &p, &faulty, "doneP", 10_000, None, exec).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_annotate,
    bench_emit,
    bench_solve,
    bench_simulate
);
criterion_main!(benches);
