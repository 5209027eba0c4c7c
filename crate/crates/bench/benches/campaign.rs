use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use qrough::{run_campaign, CampaignConfig, Ensemble};

const SAMPLES: u64 = 10_000;

fn campaign(c: &mut Criterion) {
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    group.throughput(Throughput::Elements(SAMPLES));
    for ensemble in [Ensemble::Pure, Ensemble::Rank2] {
        for workers in [1, 4] {
            let cfg = CampaignConfig::new(ensemble, SAMPLES, 1).with_workers(workers);
            group.bench_with_input(BenchmarkId::new(ensemble.to_string(), workers), &cfg, |b, cfg| {
                b.iter(|| run_campaign(cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, campaign);
criterion_main!(benches);
