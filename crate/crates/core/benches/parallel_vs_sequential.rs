use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use creature_core::atoms::split_j;
use creature_core::par;
use creature_core::subatoms::{check_bigness, BignessMode, NmFamily};
use creature_core::IndexInterval;

fn bigness(c: &mut Criterion) {
    let fam = NmFamily::unchecked(IndexInterval::new(0, 3), 2).expect("nm family");
    let mut group = c.benchmark_group("nm strong bigness |I|=3");
    group.sample_size(10);
    for jobs in [1usize, 0] {
        let label = if jobs == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &jobs, |b, &jobs| {
            b.iter(|| {
                par::with_jobs(jobs, || check_bigness(&fam, 2, BignessMode::Strong, None, u64::MAX, 0).expect("check"))
            })
        });
    }
    group.finish();
}

fn disjointify(c: &mut Criterion) {
    // three shifted runs of lengths 0, 4, ..., 80 at ell = 2
    let mut group = c.benchmark_group("splitJ shifted runs");
    group.sample_size(10);
    let n = 21u64.pow(3);
    let run = || {
        par::count_range(n, |code| {
            let sizes = [4 * (code % 21), 4 * ((code / 21) % 21), 4 * (code / 441)];
            let sets: Vec<Vec<u64>> = sizes.iter().enumerate().map(|(i, &s)| (9 * i as u64..9 * i as u64 + s).collect()).collect();
            split_j(2, &sets).is_ok()
        })
    };
    for jobs in [1usize, 0] {
        let label = if jobs == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &jobs, |b, &jobs| {
            b.iter(|| par::with_jobs(jobs, run))
        });
    }
    group.finish();
}

criterion_group!(benches, bigness, disjointify);
criterion_main!(benches);
