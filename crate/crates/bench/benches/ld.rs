use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sinrld_bench::{correlated, small_iid};
use sinrld_core::montecarlo::sample_rng;
use sinrld_core::{mmse_sinr, run_mc, sample_channel, LdModel, McConfig, Modulation, ReceiverMode};
use std::hint::black_box;

fn fixed_point(c: &mut Criterion) {
    let mut g = c.benchmark_group("fixed_point");
    for (m, k) in [(2, 1), (8, 4), (32, 16)] {
        let sc = correlated(m, k, ReceiverMode::Mmse);
        let model = LdModel::new(&sc).unwrap();
        g.bench_with_input(BenchmarkId::new("mmse", format!("m{m}_k{k}")), &model, |b, model| {
            b.iter(|| model.fixed_point(black_box(0.3), None).unwrap())
        });
    }
    g.finish();
}

fn distribution(c: &mut Criterion) {
    let mut g = c.benchmark_group("distribution");
    for (name, sc) in [("iid_m2", small_iid()), ("aoa_m8_k4", correlated(8, 4, ReceiverMode::Mmse))] {
        let model = LdModel::new(&sc).unwrap();
        let gamma = 0.7 * model.ergodic_sinr();
        g.bench_function(BenchmarkId::new("saddle", name), |b| b.iter(|| model.solve_saddle(black_box(gamma)).unwrap()));
        g.bench_function(BenchmarkId::new("pdf", name), |b| b.iter(|| model.pdf(black_box(gamma)).unwrap()));
        g.bench_function(BenchmarkId::new("cdf", name), |b| b.iter(|| model.cdf(black_box(gamma)).unwrap()));
        g.bench_function(BenchmarkId::new("ber_bpsk", name), |b| b.iter(|| model.ber(Modulation::Bpsk).unwrap()));
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let sc = correlated(8, 4, ReceiverMode::Mmse);
    c.bench_function("mc/mmse_sample_m8_k4", |b| {
        let mut rng = sample_rng(1, 0);
        b.iter(|| {
            let (g0, h0) = sample_channel(&sc, &mut rng);
            mmse_sinr(&sc, &g0, &h0)
        })
    });
    let cfg = McConfig { samples: 20_000, ..McConfig::default() };
    let mut g = c.benchmark_group("mc_run");
    g.sample_size(10);
    for mode in [ReceiverMode::Mmse, ReceiverMode::Zf] {
        let sc = correlated(8, 4, mode);
        g.bench_function(format!("{mode:?}_20k"), |b| b.iter(|| run_mc(&sc, &cfg, &[Modulation::Bpsk]).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, fixed_point, distribution, monte_carlo);
criterion_main!(benches);
