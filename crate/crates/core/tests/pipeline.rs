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

//! End-to-end checks through the public API: fill, serialize, merge, sweep.

use tree_sketch::corpus::{Corpus, ExactCounts, ZipfParams};
use tree_sketch::eval::{sweep, write_csv, Execution, SweepPlan, Variant};
use tree_sketch::{AnySketch, CmlParams, CmtsLayout, Sketch, SketchConfig, VariantParams};

fn small_corpus(seed: u64) -> Corpus {
    Corpus::from_zipf(ZipfParams {
        vocab: 2_000,
        exponent: 1.0,
        tokens: 40_000,
        seed,
    })
    .unwrap()
}

fn fill(params: VariantParams, width: u32, corpus: &Corpus) -> AnySketch {
    let mut sketch = AnySketch::new(SketchConfig::new(4, width, 9, params).unwrap());
    for token in corpus.tokens() {
        sketch.update(token.as_bytes(), 1);
    }
    sketch
}

#[test]
fn every_variant_survives_serialization() {
    let corpus = small_corpus(3);
    let exact = ExactCounts::from_corpus(&corpus);
    for params in [
        VariantParams::Cms,
        VariantParams::Cml(CmlParams::CMLS16),
        VariantParams::Cml(CmlParams::CMLS8),
        VariantParams::Cmts(CmtsLayout::default()),
    ] {
        let sketch = fill(params, 1024, &corpus);
        let bytes = sketch.to_bytes();
        let back = AnySketch::from_bytes(&bytes).unwrap();
        assert_eq!(back, sketch);
        assert_eq!(back.to_bytes(), bytes);
        for (token, _) in exact.unigrams().take(200) {
            assert_eq!(
                back.estimate(token.as_bytes()),
                sketch.estimate(token.as_bytes())
            );
        }
    }
}

#[test]
fn linear_and_tree_sketches_never_underestimate() {
    let corpus = small_corpus(4);
    let exact = ExactCounts::from_corpus(&corpus);
    for params in [
        VariantParams::Cms,
        VariantParams::Cmts(CmtsLayout::default()),
    ] {
        let sketch = fill(params, 256, &corpus);
        for (token, count) in exact.unigrams() {
            assert!(sketch.estimate(token.as_bytes()) >= count as f64, "{token}");
        }
    }
}

#[test]
fn merged_halves_match_a_single_pass_on_a_wide_sketch() {
    let corpus = small_corpus(5);
    let exact = ExactCounts::from_corpus(&corpus);
    let tokens: Vec<&str> = corpus.tokens().collect();
    let (left, right) = tokens.split_at(tokens.len() / 2);
    let config =
        SketchConfig::new(4, 1 << 16, 2, VariantParams::Cmts(CmtsLayout::default())).unwrap();
    let mut a = AnySketch::new(config);
    let mut b = AnySketch::new(config);
    left.iter().for_each(|t| a.update(t.as_bytes(), 1));
    right.iter().for_each(|t| b.update(t.as_bytes(), 1));
    let merged = a.merge(&b).unwrap();
    for (token, count) in exact.unigrams() {
        assert_eq!(merged.estimate(token.as_bytes()), count as f64, "{token}");
    }
}

#[test]
fn merge_refuses_other_variants() {
    let corpus = small_corpus(6);
    let a = fill(VariantParams::Cms, 64, &corpus);
    assert!(a.merge(&a.clone()).is_err());
}

#[test]
fn sweep_output_does_not_depend_on_execution_mode() {
    let corpus = small_corpus(7);
    let exact = ExactCounts::from_corpus(&corpus);
    let plan = SweepPlan {
        variants: vec![Variant::Cmts, Variant::Cms],
        pressures: vec![0.5, 2.0],
        seeds: vec![1, 2],
        depth: 4,
    };
    let csv = |execution| {
        let outcome = sweep(&corpus, &exact, &plan, "zipf", execution).unwrap();
        assert_eq!(outcome.reports.len(), 8);
        let mut out = Vec::new();
        write_csv(&mut out, &outcome.reports, false).unwrap();
        String::from_utf8(out).unwrap()
    };
    let sequential = csv(Execution::Sequential);
    assert_eq!(sequential, csv(Execution::default()));
    assert!(sequential.starts_with("variant,"));
    assert_eq!(sequential.lines().count(), 9);
}
