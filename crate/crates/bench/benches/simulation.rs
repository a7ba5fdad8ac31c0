use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gdg_bench::workload;
use gdg_core::checkers::{evaluate, monitor_invariants};
use gdg_core::ring::DynClass;
use gdg_core::sim::run;

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    for &(class, n, robots) in &[
        (DynClass::St, 8, 5),
        (DynClass::Bre(3), 8, 5),
        (DynClass::Ac, 8, 5),
        (DynClass::Cot, 8, 5),
        (DynClass::St, 16, 8),
    ] {
        let w = workload(class, n, robots, 7);
        group.bench_with_input(BenchmarkId::new(class.to_string(), format!("n{n}_r{robots}")), &w, |b, w| {
            b.iter(|| run(&w.ring, &w.placement, 20_000).expect("valid workload"))
        });
    }
    group.finish();
}

fn check(c: &mut Criterion) {
    let w = workload(DynClass::Bre(2), 10, 6, 11);
    let trace = run(&w.ring, &w.placement, 20_000).expect("valid workload").trace;
    c.bench_function("monitor_invariants", |b| b.iter(|| monitor_invariants(&trace)));
    c.bench_function("evaluate", |b| b.iter(|| evaluate(&trace, Some(1_000_000))));
}

criterion_group!(benches, simulate, check);
criterion_main!(benches);
