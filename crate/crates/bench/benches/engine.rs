use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use vok_core::eval::eval_pred;
use vok_core::explorer::explore;
use vok_core::parser::parse_expr;
use vok_core::projection::project;

fn explore_abstract(c: &mut Criterion) {
    let session = vok_bench::session();
    let m = session.flat("train_routes").unwrap();
    let inst = session.instance("train_routes").unwrap();
    let mut group = c.benchmark_group("explore");
    group.sample_size(10);
    group.bench_function("train_routes", |b| {
        b.iter(|| black_box(explore(&m, &inst.env, 1_000_000).unwrap().len()))
    });
    group.bench_function("train_1_routes/20k", |b| {
        let m = session.flat("train_1_routes").unwrap();
        let inst = session.instance("train_1_routes").unwrap();
        b.iter(|| black_box(explore(&m, &inst.env, 20_000).unwrap().len()))
    });
    group.finish();
}

fn evaluate_axioms(c: &mut Criterion) {
    let session = vok_bench::session();
    let inst = session.instance("train_1_routes_beebook").unwrap();
    let axioms: Vec<_> = session
        .project
        .execution_contexts("train_1_routes_beebook")
        .unwrap()
        .into_iter()
        .flat_map(|ctx| ctx.axioms.iter().map(|a| a.pred.clone()))
        .collect();
    c.bench_function("eval/topology_axioms", |b| {
        b.iter(|| {
            for ax in &axioms {
                black_box(eval_pred(ax, &inst.env).unwrap());
            }
        })
    });
}

fn project_status(c: &mut Criterion) {
    let session = vok_bench::session();
    let ss = session.explore("train_routes").unwrap();
    let inst = session.instance("train_routes").unwrap();
    let e = parse_expr("rs(R8)").unwrap();
    let mut group = c.benchmark_group("project");
    group.sample_size(20);
    group.bench_function("rs(R8)", |b| {
        b.iter_batched(
            || e.clone(),
            |e| black_box(project(&ss, &e, &inst.env).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, explore_abstract, evaluate_axioms, project_status);
criterion_main!(benches);
