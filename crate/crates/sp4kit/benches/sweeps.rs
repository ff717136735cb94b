use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sp4kit::arith::{SymHalf2, SymReal2};
use sp4kit::counting::count_sweep;
use sp4kit::expsums::{kitaoka_sweep, symmetry_sweep};
use sp4kit::gl2::{shifted_sum_demo, PsiSpec};
use sp4kit::par::Exec;
use sp4kit::poincare::{a2_truncated, FourierCoeffRequest};
use sp4kit::quadrature::{QuadConfig, TestFunction};

const POLICIES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn configure<'a>(c: &'a mut Criterion, name: &str) -> criterion::BenchmarkGroup<'a, criterion::measurement::WallTime> {
    let mut g = c.benchmark_group(name);
    g.sample_size(10).warm_up_time(Duration::from_millis(500)).measurement_time(Duration::from_secs(3));
    g
}

fn kitaoka(c: &mut Criterion) {
    let (q, t) = (SymHalf2::new(1, 0, 1), SymHalf2::new(1, 1, 2));
    let mut g = configure(c, "kitaoka_sweep");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "bound 2"), |b| b.iter(|| kitaoka_sweep(&q, &t, 2, exec).unwrap()));
    }
    g.finish();
}

fn symmetry(c: &mut Criterion) {
    let pairs = [
        (SymHalf2::new(1, 0, 1), SymHalf2::new(1, 1, 2)),
        (SymHalf2::new(2, -1, 3), SymHalf2::new(0, 1, 0)),
        (SymHalf2::new(1, 0, -2), SymHalf2::new(3, 2, 1)),
    ];
    let mut g = configure(c, "symmetry_sweep");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "bound 2"), |b| b.iter(|| symmetry_sweep(&pairs, 2, exec).unwrap()));
    }
    g.finish();
}

fn counting(c: &mut Criterion) {
    let ts = [SymHalf2::new(1, 1, 2), SymHalf2::new(1, 0, -2)];
    let mut g = configure(c, "count_sweep");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "X 4,8"), |b| b.iter(|| count_sweep(&[4.0, 8.0], &ts, exec).unwrap()));
    }
    g.finish();
}

fn rank_two(c: &mut Criterion) {
    let id = SymHalf2::new(1, 0, 1);
    let tf = TestFunction::standard(4.0, 12).unwrap();
    let req = FourierCoeffRequest::new(id, SymHalf2::new(1, 1, 2), SymReal2::identity(), tf, 1.0)
        .unwrap()
        .with_quad(QuadConfig::default().with_tol(1e-3));
    let mut g = configure(c, "a2_truncated");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "cutoff 1"), |b| b.iter(|| a2_truncated(&req, exec).unwrap()));
    }
    g.finish();
}

fn shifted(c: &mut Criterion) {
    let psi = PsiSpec::new(64.0).unwrap();
    let cfg = QuadConfig::default();
    let mut g = configure(c, "shifted_sum");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, "N 64"), |b| b.iter(|| shifted_sum_demo(1, &psi, &cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(sweeps, kitaoka, symmetry, counting, rank_two, shifted);
criterion_main!(sweeps);
