use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wfoeil::{catalog_words, decide_equiv, translate_wfoeil, wfoeil_eval, Architecture, Assignment, Semiring, TranslateOptions};
use wfoeil_bench::case;

fn translation(c: &mut Criterion) {
    let mut group = c.benchmark_group("translate");
    group.sample_size(10);
    for id in Architecture::ALL {
        let case = case(id, Semiring::Rational, &id.instances().0).unwrap();
        group.bench_function(BenchmarkId::from_parameter(id), |b| {
            b.iter(|| {
                translate_wfoeil(&case.view, &case.alphabet, &Assignment::new(), &case.sentence, &TranslateOptions::default())
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn star_growth(c: &mut Criterion) {
    let mut group = c.benchmark_group("star");
    group.sample_size(10);
    for n in 2..=5 {
        let case = case(Architecture::Star, Semiring::Natural, &[n]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &case, |b, case| {
            b.iter(|| {
                translate_wfoeil(&case.view, &case.alphabet, &Assignment::new(), &case.sentence, &TranslateOptions::default())
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    group.sample_size(10);
    for id in Architecture::ALL {
        let case = case(id, Semiring::Natural, &id.instances().0).unwrap();
        let words = catalog_words(id, &id.instances()).unwrap();
        group.bench_function(BenchmarkId::from_parameter(id), |b| {
            b.iter(|| {
                for (_, w) in &words {
                    wfoeil_eval(&case.view, &Assignment::new(), w, &case.sentence).unwrap();
                }
            })
        });
    }
    group.finish();
}

fn equivalence(c: &mut Criterion) {
    let mut group = c.benchmark_group("equiv");
    group.sample_size(10);
    for id in Architecture::ALL {
        let case = case(id, Semiring::Rational, &id.instances().0).unwrap();
        let a = translate_wfoeil(&case.view, &case.alphabet, &Assignment::new(), &case.sentence, &TranslateOptions::default())
            .unwrap();
        group.bench_function(BenchmarkId::from_parameter(id), |b| b.iter(|| decide_equiv(&a, &a).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, translation, star_growth, evaluation, equivalence);
criterion_main!(benches);
