use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use framekit_core::approx_dual::minimal_norm_audit;
use framekit_core::corpus::{run_corpus, CorpusConfig};
use framekit_core::random::{random_admissible_a, random_frame, stream};
use framekit_core::{ExecMode, TolerancePolicy};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn corpus(c: &mut Criterion) {
    let mut group = c.benchmark_group("corpus");
    group.sample_size(10);
    for (label, mode) in MODES {
        let mut cfg = CorpusConfig::new(42, 24);
        cfg.mode = mode;
        group.bench_with_input(BenchmarkId::from_parameter(label), &cfg, |b, cfg| {
            b.iter(|| run_corpus(cfg).expect("corpus runs"))
        });
    }
    group.finish();
}

fn minimal_norm(c: &mut Criterion) {
    let tol = TolerancePolicy::default();
    let mut rng = stream(1, "bench", 0);
    let f = random_frame(8, 40, &mut rng);
    let a = random_admissible_a(8, &mut rng);
    let mut group = c.benchmark_group("minimal-norm");
    for (label, mode) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| minimal_norm_audit(&f, &a, 64, 7, mode, &tol).expect("frame"))
        });
    }
    group.finish();
}

criterion_group!(benches, corpus, minimal_norm);
criterion_main!(benches);
