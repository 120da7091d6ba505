//  Copyright 2026 The tree-sketch Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use tree_sketch::corpus::{Corpus, ExactCounts, ZipfParams};
use tree_sketch::eval::{size_config, sweep, Execution, SweepPlan, Variant};
use tree_sketch::{AnySketch, Sketch};

fn corpus() -> (Corpus, ExactCounts) {
    let corpus = Corpus::from_zipf(ZipfParams {
        vocab: 20_000,
        exponent: 1.0,
        tokens: 200_000,
        seed: 1,
    })
    .unwrap();
    let exact = ExactCounts::from_corpus(&corpus);
    (corpus, exact)
}

fn sweep_execution(c: &mut Criterion) {
    let (corpus, exact) = corpus();
    let plan = SweepPlan {
        pressures: vec![0.25, 1.0, 4.0],
        seeds: vec![1, 2],
        ..SweepPlan::default()
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| sweep(&corpus, &exact, &plan, "bench", Execution::Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            sweep(
                &corpus,
                &exact,
                &plan,
                "bench",
                Execution::Parallel { threads: None },
            )
            .unwrap()
        })
    });
    group.finish();
}

fn update_throughput(c: &mut Criterion) {
    let (corpus, exact) = corpus();
    let keys: Vec<&[u8]> = corpus.tokens().map(str::as_bytes).collect();
    let ideal = 4.0 * exact.distinct_unigrams() as f64;
    let mut group = c.benchmark_group("update");
    group.throughput(Throughput::Elements(keys.len() as u64));
    for variant in Variant::ALL {
        let config = size_config(variant, ideal, 4, 1).unwrap();
        group.bench_function(variant.label(), |b| {
            b.iter_batched_ref(
                || AnySketch::new(config),
                |sketch| {
                    for k in &keys {
                        sketch.update(black_box(k), 1);
                    }
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_execution, update_throughput);
criterion_main!(benches);
