use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exmerge_core::harness::oracle::{random_finite_space, random_measure, real_grid};
use exmerge_core::measures::{DiscreteMeasure, GroundSpace, Point};
use exmerge_core::metrics::{
    dw, expected_distance_to, fortet_mourier, ot_cost, prokhorov, prokhorov_to_dirac, w1_real, BaseMetric,
    ClassConfig, DeterminingClass,
};
use exmerge_core::models::{FiniteDirichletModel, PosteriorState};
use exmerge_core::ExchangeableModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite_pair(k: usize, seed: u64) -> (DiscreteMeasure, DiscreteMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_finite_space(&mut rng, k);
    let atoms: Vec<Point> = (0..k).map(Point::Label).collect();
    (random_measure(&mut rng, &space, &atoms, k), random_measure(&mut rng, &space, &atoms, k))
}

fn transport(c: &mut Criterion) {
    let mut group = c.benchmark_group("transport");
    for k in [8, 32, 96] {
        let (a, b) = finite_pair(k, 1);
        group.bench_with_input(BenchmarkId::new("ot_p1", k), &k, |bch, _| {
            bch.iter(|| ot_cost(black_box(&a), black_box(&b), 1.0).unwrap())
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let atoms = real_grid(&mut rng, 40);
    let a = random_measure(&mut rng, &GroundSpace::RealLine, &atoms, 40);
    let b = random_measure(&mut rng, &GroundSpace::RealLine, &atoms, 40);
    group.bench_function("w1_real_40", |bch| bch.iter(|| w1_real(black_box(&a), black_box(&b)).unwrap()));
    group.finish();
}

fn prokhorov_and_fm(c: &mut Criterion) {
    let mut group = c.benchmark_group("prokhorov");
    for k in [8, 32, 96] {
        let (a, b) = finite_pair(k, 3);
        group.bench_with_input(BenchmarkId::new("exact", k), &k, |bch, _| {
            bch.iter(|| prokhorov(black_box(&a), black_box(&b)).unwrap())
        });
    }
    let (a, b) = finite_pair(16, 4);
    group.bench_function("fortet_mourier_16", |bch| {
        bch.iter(|| fortet_mourier(black_box(&a), black_box(&b)).unwrap())
    });
    group.finish();
}

fn determining(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let atoms = real_grid(&mut rng, 30);
    let a = random_measure(&mut rng, &GroundSpace::RealLine, &atoms, 30);
    let b = random_measure(&mut rng, &GroundSpace::RealLine, &atoms, 30);
    let cls = DeterminingClass::new(GroundSpace::RealLine, &ClassConfig::default()).unwrap();
    c.bench_function("dw_real_30", |bch| bch.iter(|| dw(black_box(&a), black_box(&b), &cls).unwrap()));
}

fn posterior_step(c: &mut Criterion) {
    let model = Arc::new(ExchangeableModel::FiniteDirichlet(FiniteDirichletModel::symmetric(4, 1.0).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (_, xs) = model.sample_sequence(1000, &mut rng).unwrap();
    let mut state = PosteriorState::new(model.clone());
    state.observe_all(&xs).unwrap();
    let e = DiscreteMeasure::empirical(&xs, &model.space()).unwrap();
    let mut group = c.benchmark_group("posterior_step");
    group.bench_function("draw_500", |bch| bch.iter(|| state.posterior_sample(500, &mut rng).unwrap()));
    let q = state.posterior_sample(500, &mut rng).unwrap();
    group.bench_function("expected_w1_500", |bch| {
        bch.iter(|| expected_distance_to(black_box(&q), &e, BaseMetric::Wasserstein1).unwrap())
    });
    group.bench_function("prokhorov_to_dirac_500", |bch| {
        bch.iter(|| prokhorov_to_dirac(black_box(&q), &e, BaseMetric::Prokhorov).unwrap())
    });
    group.finish();
}

criterion_group!(benches, transport, prokhorov_and_fm, determining, posterior_step);
criterion_main!(benches);
