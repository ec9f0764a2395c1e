//! Criterion benches comparing the rayon-parallel study loops against the
//! always-sequential twin on the same workload. Build with default features
//! for the parallel path; `--no-default-features` makes both paths
//! sequential, which is the baseline sanity check.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eddylab::document::ScenarioDocument;
use eddylab::harness::Workbench;
use eddylab::par::{map_collect, map_collect_seq};

fn bench_family_solves(c: &mut Criterion) {
    let doc = ScenarioDocument::default_document()
        .with_grid_resolution(8)
        .expect("8-cell scenario derives from the default");
    let wb = doc.workbench().expect("workbench builds");
    let forcing = wb
        .forcing_spec()
        .sample(0.02, 40, 1.0)
        .expect("forcing samples");
    let s_values: Vec<f64> = vec![1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 0.0];

    let solve_all_par = |wb: &Workbench| {
        let results = map_collect(&s_values, |&s| {
            wb.solve(s, forcing.clone(), 1e-10).expect("solve succeeds")
        });
        results.len()
    };
    let solve_all_seq = |wb: &Workbench| {
        let results = map_collect_seq(&s_values, |&s| {
            wb.solve(s, forcing.clone(), 1e-10).expect("solve succeeds")
        });
        results.len()
    };

    let mut group = c.benchmark_group("family_solves_8cube");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", s_values.len()), &wb, |b, wb| {
        b.iter(|| solve_all_par(wb))
    });
    group.bench_with_input(BenchmarkId::new("sequential", s_values.len()), &wb, |b, wb| {
        b.iter(|| solve_all_seq(wb))
    });
    group.finish();
}

fn bench_single_step_kernels(c: &mut Criterion) {
    let doc = ScenarioDocument::default_document();
    let wb = doc.workbench().expect("workbench builds");
    let grid = wb.grid();
    let curl = eddylab::ops::assemble_curl0(grid);
    let x = vec![1.0; curl.ncols()];
    let mut y = vec![0.0; curl.nrows()];

    let mut group = c.benchmark_group("curl_matvec_16cube");
    group.bench_function("apply", |b| b.iter(|| curl.apply_into(&x, &mut y)));
    let mut xt = vec![0.0; curl.ncols()];
    group.bench_function("apply_transpose", |b| {
        b.iter(|| curl.apply_transpose_into(&y, &mut xt))
    });
    group.finish();
}

criterion_group!(benches, bench_family_solves, bench_single_step_kernels);
criterion_main!(benches);
