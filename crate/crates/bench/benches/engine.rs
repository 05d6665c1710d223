use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pursuit_core::engine::{run, step, SimConfig};
use pursuit_core::games::{phi_star, TargetPrimitive, TargetSet, ValueField};
use pursuit_core::suite::{run_suite, SuiteConfig};
use pursuit_core::{Disc, EvaderStrategy, GameState, PursuerStrategy, SpeedRatio, Vec2};

fn single_step(c: &mut Criterion) {
    let nu = SpeedRatio::new(0.6).unwrap();
    let s = GameState::initial(Vec2::ZERO, Vec2::new(0.3, 1.0), nu, 0.1).unwrap();
    let mut ev = EvaderStrategy::WorstCase;
    c.bench_function("step_guaranteed", |b| {
        b.iter(|| step(black_box(&s), &mut PursuerStrategy::Guaranteed, &mut ev, 0.6, 1e-3).unwrap())
    });
}

fn full_run(c: &mut Criterion) {
    let nu = SpeedRatio::new(0.6).unwrap();
    let mut cfg = SimConfig::new(nu, 0.1);
    cfg.record = false;
    c.bench_function("run_to_capture", |b| {
        b.iter(|| {
            run(
                &cfg,
                Vec2::ZERO,
                Vec2::new(0.3, 1.0),
                &mut PursuerStrategy::Guaranteed,
                &mut EvaderStrategy::WorstCase,
                None,
            )
            .unwrap()
        })
    });
}

fn field_minimum(c: &mut Criterion) {
    let field = ValueField::DistanceToTarget {
        targets: TargetSet::new(vec![
            TargetPrimitive::Point { at: Vec2::new(4.0, 1.0) },
            TargetPrimitive::Segment { a: Vec2::new(-3.0, 3.0), b: Vec2::new(3.0, 5.0) },
            TargetPrimitive::Polyline {
                points: vec![Vec2::new(-5.0, -1.0), Vec2::new(-4.0, 2.0), Vec2::new(-6.0, 4.0)],
            },
        ]),
    };
    let disc = Disc::new(Vec2::new(0.2, 0.5), 1.3).unwrap();
    c.bench_function("phi_star_mixed_targets", |b| b.iter(|| phi_star(black_box(&field), &disc)));
}

fn suite(c: &mut Criterion) {
    let cfg = SuiteConfig {
        runs: 8,
        parallel: false,
        ..SuiteConfig::default()
    };
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    g.bench_function("eight_scenarios", |b| b.iter(|| run_suite(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, single_step, full_run, field_minimum, suite);
criterion_main!(benches);
