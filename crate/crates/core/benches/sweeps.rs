use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mplab_core::domains::{Domain, Grid};
use mplab_core::eigen::{blowup_eigenvalue, perron_solve, BlowupOptions};
use mplab_core::mp::mp_test;
use mplab_core::operators::lookup;
use mplab_core::par::Execution;
use mplab_core::scheme::DiscreteScheme;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn scheme(name: &str, domain: &Domain, h: f64, exec: Execution) -> DiscreteScheme {
    let spec = lookup(name).unwrap().spec;
    DiscreteScheme::new(spec, Arc::new(Grid::new(domain, h).unwrap())).unwrap().with_execution(exec)
}

fn residual_sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("perron-sweeps");
    g.sample_size(10);
    let disk = Domain::disk(0.0, 0.0, 1.0);
    for exec in MODES {
        let s = scheme("neg-p1-2d", &disk, 1.0 / 80.0, exec);
        let opts = BlowupOptions { max_sweeps: 200, execution: exec, ..BlowupOptions::default() };
        g.bench_function(BenchmarkId::new("neg-p1-2d", format!("{exec:?}")), |b| {
            b.iter(|| black_box(perron_solve(&s, 1.0, &opts).sweeps))
        });
    }
    g.finish();
}

fn bisection(c: &mut Criterion) {
    let mut g = c.benchmark_group("blowup-eigenvalue");
    g.sample_size(10);
    let disk = Domain::disk(0.0, 0.0, 1.0);
    for exec in MODES {
        let s = scheme("neg-p1-2d", &disk, 1.0 / 20.0, exec);
        let opts = BlowupOptions { execution: exec, ..BlowupOptions::default() };
        g.bench_function(BenchmarkId::new("neg-p1-2d", format!("{exec:?}")), |b| {
            b.iter(|| black_box(blowup_eigenvalue(&s, &opts).unwrap().value))
        });
    }
    g.finish();
}

fn descent(c: &mut Criterion) {
    let mut g = c.benchmark_group("mp-descent");
    g.sample_size(10);
    let unit = Domain::interval(0.0, 1.0);
    for exec in MODES {
        let s = scheme("double-drift", &unit, 1.0 / 400.0, exec);
        g.bench_function(BenchmarkId::new("double-drift", format!("{exec:?}")), |b| {
            b.iter(|| black_box(mp_test(&s, 1.0, 1e-3).unwrap().iterations))
        });
    }
    g.finish();
}

criterion_group!(benches, residual_sweeps, bisection, descent);
criterion_main!(benches);
