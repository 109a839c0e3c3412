use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lexicorp::stats::{gen_synthetic_corpus, SyntheticSpec};
use lexicorp::{Dictionary, Pipeline, PipelineConfig, Provenance, TokenList};

const FILLER: &[&str] = &[
    "The", "results", "were", "analysed", "using", "non-linear", "regression,", "and",
    "2014", "patients", "showed", "significantly", "improved", "outcomes.",
];

fn abstracts(n: usize) -> Vec<String> {
    let spec = SyntheticSpec { doc_len: 160, ..SyntheticSpec::new(20_000, n, 1.1, 7) };
    gen_synthetic_corpus(&spec)
        .unwrap()
        .enumerate()
        .map(|(i, doc)| {
            let mut words: Vec<&str> = doc.iter().map(String::as_str).collect();
            for (j, f) in FILLER.iter().cycle().skip(i % FILLER.len()).take(40).enumerate() {
                words.insert((j * 4) % words.len(), f);
            }
            words.join(" ")
        })
        .collect()
}

fn pipeline(c: &mut Criterion) {
    let p = Pipeline::new(PipelineConfig::default()).unwrap();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for n in [1_000usize, 5_000] {
        let texts = abstracts(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("seq", n), &texts, |b, t| {
            b.iter(|| p.process_all_seq(t))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &texts, |b, t| {
            b.iter(|| p.process_all_par(t))
        });
    }
    group.finish();
}

fn dictionary(c: &mut Criterion) {
    let mut group = c.benchmark_group("dictionary");
    group.sample_size(10);
    for n in [10_000usize, 50_000] {
        let spec = SyntheticSpec::new(50_000, n, 1.1, 11);
        let lists: Vec<TokenList> = gen_synthetic_corpus(&spec).unwrap().collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("seq", n), &lists, |b, l| {
            b.iter(|| Dictionary::build_seq(l, Provenance::default()))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &lists, |b, l| {
            b.iter(|| Dictionary::build_par(l, Provenance::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline, dictionary);
criterion_main!(benches);
