use criterion::{black_box, criterion_group, criterion_main, Criterion};

use octagon_bench::{convex_point, exact_point};
use octagon_core::flow::trace_nice_loop;
use octagon_core::invariants::{f1, f2};
use octagon_core::maps::t3;
use octagon_core::poncelet::{fixed_points, fixed_points_f64};
use octagon_core::scalar::{jacobian, rat};
use octagon_core::{LevelSpec, LftLevel};

fn maps(c: &mut Criterion) {
    let p = exact_point();
    let q = convex_point();
    c.bench_function("t3 exact", |b| b.iter(|| t3(black_box(&p)).unwrap()));
    c.bench_function("t3 float", |b| b.iter(|| t3(black_box(&q)).unwrap()));
    c.bench_function("t3 float x1000", |b| {
        b.iter(|| {
            let mut x = q.clone();
            for _ in 0..1000 {
                x = t3(&x).unwrap();
            }
            x
        })
    });
    c.bench_function("t3 jacobian exact", |b| b.iter(|| jacobian(|x| t3(x), black_box(&p)).unwrap()));
    c.bench_function("t3 jacobian float", |b| b.iter(|| jacobian(|x| t3(x), black_box(&q)).unwrap()));
}

fn invariants(c: &mut Criterion) {
    let p = exact_point();
    let q = convex_point();
    c.bench_function("F1 F2 exact", |b| b.iter(|| (f1(black_box(&p)).unwrap(), f2(black_box(&p)).unwrap())));
    c.bench_function("F1 F2 float", |b| b.iter(|| (f1(black_box(&q)).unwrap(), f2(black_box(&q)).unwrap())));
}

fn curves(c: &mut Criterion) {
    let level = LevelSpec::from_f(rat(3, 1), rat(4, 1));
    let mut g = c.benchmark_group("curves");
    g.sample_size(10);
    g.bench_function("nice loop 3,4", |b| b.iter(|| trace_nice_loop(black_box(&level), 1e-2).unwrap()));
    g.finish();

    let lvl = LftLevel::new(rat(1, 10), rat(3, 10));
    c.bench_function("fixed points exact", |b| b.iter(|| fixed_points(black_box(&lvl)).unwrap()));
    c.bench_function("fixed points float", |b| b.iter(|| fixed_points_f64(black_box(0.1), black_box(0.3)).unwrap()));
}

criterion_group!(benches, maps, invariants, curves);
criterion_main!(benches);
