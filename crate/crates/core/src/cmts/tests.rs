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

use super::block::{barrier_offset, barriers_for};
use super::*;
use crate::cms::CmsSketch;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn toy() -> CmtsLayout {
    CmtsLayout::new(8, 4, 4).unwrap()
}

fn sketch(depth: u32, width: u32, layout: CmtsLayout, seed: u64) -> CmtsSketch {
    CmtsSketch::new(SketchConfig::new(depth, width, seed, VariantParams::Cmts(layout)).unwrap())
}

/// Barrier count of `v` found by walking the value ranges: `b` barriers
/// cover `[2^(b+1) - 2, 2^(b+2) - 3]`, and the top level absorbs the rest.
fn range_oracle(levels: u32, v: u64) -> u32 {
    let mut b = 0;
    while b < levels && v > (1u64 << (b + 2)) - 3 {
        b += 1;
    }
    b
}

#[test]
fn range_partition_is_exhaustive() {
    for layout in [toy(), CmtsLayout::default()] {
        let levels = u32::from(layout.levels());
        let max = layout.max_value().min(1 << 22);
        for v in 0..=max {
            assert_eq!(
                barriers_for(levels, v),
                range_oracle(levels, v),
                "value {v}"
            );
        }
        for b in 0..levels {
            let lo = (1u64 << (b + 1)) - 2;
            let hi = (1u64 << (b + 2)) - 3;
            assert_eq!(barriers_for(levels, lo), b);
            assert_eq!(barriers_for(levels, hi), b);
            assert_eq!(barrier_offset(b), lo);
        }
    }
}

#[test]
fn encode_decode_identity_toy_full_range() {
    let layout = toy();
    for offset in 0..8 {
        for v in 0..=layout.max_value() {
            let mut block = CmtsBlock::new(layout);
            block.encode(offset, v);
            assert_eq!(block.decode(offset), v);
            assert_eq!(
                block.barrier_count(offset),
                range_oracle(u32::from(layout.levels()), v)
            );
        }
    }
}

#[test]
fn encode_decode_identity_default_layout() {
    let layout = CmtsLayout::default();
    let mut block = CmtsBlock::new(layout);
    let max = layout.max_value();
    let boundary = (max - 1000)..=max;
    for v in (0..=1_000_000u64).chain(boundary) {
        let offset = (v % 128) as u32;
        let mut fresh = CmtsBlock::new(layout);
        fresh.encode(offset, v);
        assert_eq!(fresh.decode(offset), v);
        // Rewriting upwards in place is exact as well.
        block.encode(77, v);
        assert_eq!(block.decode(77), v);
    }
}

#[test]
fn thirteen_increments() {
    let mut s = sketch(1, 8, toy(), 0);
    for _ in 0..13 {
        s.increment(b"k");
    }
    assert_eq!(s.point(b"k"), 13);
}

#[test]
fn saturation_is_silent() {
    let layout = CmtsLayout::new(2, 2, 1).unwrap();
    let mut s = sketch(1, 2, layout, 0);
    for _ in 0..(layout.max_value() + 10) {
        s.increment(b"k");
    }
    assert_eq!(s.point(b"k"), layout.max_value());
}

#[test]
fn conflicting_counters_overestimate() {
    // Offsets 4 and 7 of an 8-wide block first share bits at layer 2.
    let mut block = CmtsBlock::new(toy());
    let (mut true4, mut true7) = (0u64, 0u64);
    for _ in 0..40 {
        for (offset, truth) in [(4u32, &mut true4), (7u32, &mut true7)] {
            let v = block.decode(offset);
            block.encode(offset, v + 1);
            *truth += 1;
        }
    }
    let (v4, v7) = (block.decode(4), block.decode(7));
    assert!(v4 > true4 || v7 > true7, "4: {v4}/{true4}, 7: {v7}/{true7}");
}

#[test]
fn partner_can_overtake_the_written_maximum() {
    // Counter 6 reaching 2 sets the barrier it shares with 7; 7 then reads
    // its old layer-0 bit on a two-bit path and decodes 3.
    let mut block = CmtsBlock::new(toy());
    for offset in [6u32, 0, 7, 6] {
        let v = block.decode(offset);
        block.encode(offset, v + 1);
    }
    assert_eq!(block.decode(6), 2);
    assert_eq!(block.decode(7), 3);
}

#[test]
fn memory_accounting() {
    let layout = CmtsLayout::default();
    let config = SketchConfig::new(1, 128, 0, VariantParams::Cmts(layout)).unwrap();
    let s = CmtsSketch::new(config);
    assert_eq!(s.memory_bytes(), 52);
    assert_eq!(s.block_count(), 1);
    assert_eq!(
        memory_bytes(&config).unwrap(),
        52 + crate::codec::header_len(&config)
    );
    let config = SketchConfig::new(4, 128 * 10, 0, VariantParams::Cmts(layout)).unwrap();
    assert_eq!(CmtsSketch::new(config).memory_bytes(), 4 * 10 * 52);
    assert!(memory_bytes(&SketchConfig::new(1, 8, 0, VariantParams::Cms).unwrap()).is_err());
}

fn zipf_stream(keys: u32, n: usize, seed: u64) -> Vec<u32> {
    let dist = rand_distr::Zipf::new(f64::from(keys), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(dist) as u32).collect()
}

#[test]
fn absolute_error_not_worse_than_linear_on_wide_sketches() {
    // 10^5 increments over 10^3 keys, both sketches 2^20 counters wide.
    let stream = zipf_stream(1000, 100_000, 3);
    let depth = 4;
    let width = 1 << 20;
    for seed in 0..5 {
        let mut tree = sketch(depth, width, CmtsLayout::default(), seed);
        let mut cms =
            CmsSketch::new(SketchConfig::new(depth, width, seed, VariantParams::Cms).unwrap());
        let mut truth: HashMap<u32, u64> = HashMap::new();
        for k in &stream {
            let key = k.to_le_bytes();
            tree.increment(&key);
            cms.increment(&key);
            *truth.entry(*k).or_default() += 1;
        }
        let max_err = |est: &dyn Fn(&[u8]) -> u64| {
            truth
                .iter()
                .map(|(k, &t)| est(&k.to_le_bytes()).abs_diff(t))
                .max()
                .unwrap()
        };
        let tree_err = max_err(&|k| tree.point(k));
        let cms_err = max_err(&|k| u64::from(cms.point(k)));
        assert!(
            tree_err <= cms_err,
            "seed {seed}: tree {tree_err} > linear {cms_err}"
        );
    }
}

#[test]
fn merge_with_empty_reproduces_values() {
    let mut a = sketch(2, 256, CmtsLayout::default(), 9);
    for k in zipf_stream(300, 20_000, 1) {
        a.increment(&k.to_le_bytes());
    }
    let empty = sketch(2, 256, CmtsLayout::default(), 9);
    let merged = a.merge(&empty).unwrap();
    for row in 0..2 {
        for block in 0..2 {
            assert_eq!(merged.block_values(row, block), a.block_values(row, block));
        }
    }
}

#[test]
fn merge_is_commutative() {
    let mut a = sketch(2, 256, CmtsLayout::default(), 4);
    let mut b = sketch(2, 256, CmtsLayout::default(), 4);
    for k in zipf_stream(500, 10_000, 1) {
        a.increment(&k.to_le_bytes());
    }
    for k in zipf_stream(500, 10_000, 2) {
        b.increment(&k.to_le_bytes());
    }
    assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
}

#[test]
fn merge_of_single_counters() {
    let mut a = sketch(1, 8, toy(), 0);
    let mut b = sketch(1, 8, toy(), 0);
    for _ in 0..5 {
        a.increment(b"k");
    }
    for _ in 0..9 {
        b.increment(b"k");
    }
    let merged = a.merge(&b).unwrap();
    assert_eq!(merged.point(b"k"), 14);
    // 14 encodes with bit_length(16 / 4) = 3 barriers and counting value 0.
    assert_eq!(barriers_for(4, 14), 3);
    assert_eq!(14 - barrier_offset(3), 0);
}

#[test]
fn merge_rejects_mismatched_configs() {
    let a = sketch(1, 128, CmtsLayout::default(), 0);
    let b = sketch(1, 128, CmtsLayout::default(), 1);
    let c = sketch(1, 256, CmtsLayout::default(), 0);
    assert!(matches!(a.merge(&b), Err(Error::IncompatibleSketches(_))));
    assert!(matches!(a.merge(&c), Err(Error::IncompatibleSketches(_))));
}

#[test]
fn merge_clamps_at_maximum() {
    let layout = CmtsLayout::new(2, 2, 1).unwrap();
    let mut a = sketch(1, 2, layout, 0);
    for _ in 0..layout.max_value() {
        a.increment(b"k");
    }
    let merged = a.merge(&a).unwrap();
    assert_eq!(merged.point(b"k"), layout.max_value());
}

fn barriers_cover(old: &[u64], new: &[u64]) -> bool {
    old.iter().zip(new).all(|(o, n)| o & !n == 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barriers_never_clear(ops in prop::collection::vec((0u16..64, any::<bool>()), 1..400), seed in 0u64..1000) {
        let layout = toy();
        let mut s = sketch(2, 16, layout, seed);
        let mut other = sketch(2, 16, layout, seed);
        for (key, merge) in ops {
            let before = s.barrier_words();
            if merge {
                other.increment(&key.to_le_bytes());
                s = s.merge(&other).unwrap();
            } else {
                s.increment(&key.to_le_bytes());
            }
            prop_assert!(barriers_cover(&before, &s.barrier_words()));
        }
    }

    #[test]
    fn incremented_key_reaches_min_plus_one(keys in prop::collection::vec(0u16..200, 1..500)) {
        let mut s = sketch(3, 32, toy(), 1);
        for k in keys {
            let key = k.to_le_bytes();
            let before = s.point(&key);
            s.increment(&key);
            let target = (before + 1).min(s.max_value());
            for v in s.row_values(&key) {
                prop_assert!(v >= target);
            }
        }
    }

    #[test]
    fn dominant_counter_is_exact_after_increment(offsets in prop::collection::vec(0u32..8, 1..300)) {
        // The counter last written with the block's largest written value
        // reads it back. Neighbours may decode above it: a barrier set by one
        // counter lifts its partner onto a longer path.
        let mut block = CmtsBlock::new(toy());
        let mut written = [0u64; 8];
        let mut dominant = 0usize;
        for i in offsets {
            let i = i as usize;
            let v = block.decode(i as u32);
            written[i] = (v + 1).min(block.layout().max_value());
            block.encode(i as u32, written[i]);
            if written[i] >= written[dominant] {
                dominant = i;
            }
            prop_assert_eq!(block.decode(dominant as u32), written[dominant]);
        }
    }

    #[test]
    fn merge_keeps_dominant_counter_exact(a_keys in prop::collection::vec(0u16..100, 0..300), b_keys in prop::collection::vec(0u16..100, 0..300)) {
        let mut a = sketch(1, 16, toy(), 2);
        let mut b = sketch(1, 16, toy(), 2);
        for k in a_keys { a.increment(&k.to_le_bytes()); }
        for k in b_keys { b.increment(&k.to_le_bytes()); }
        let merged = a.merge(&b).unwrap();
        for block in 0..2 {
            let sums: Vec<u64> = a.block_values(0, block).iter().zip(b.block_values(0, block))
                .map(|(x, y)| (x + y).min(merged.max_value()))
                .collect();
            let top = *sums.iter().max().unwrap();
            let values = merged.block_values(0, block);
            // The last write (largest sum, highest offset among ties) is never disturbed.
            let last = sums.iter().rposition(|&s| s == top).unwrap();
            prop_assert_eq!(values[last], top);
            for (v, s) in values.iter().zip(&sums) {
                prop_assert!(v >= s);
            }
        }
    }

    #[test]
    fn merged_estimates_cover_disjoint_streams(split in 1usize..2000) {
        let stream = zipf_stream(200, 2000, 17);
        let (left, right) = stream.split_at(split.min(stream.len()));
        let mut a = sketch(4, 128 * 100, CmtsLayout::default(), 5);
        let mut b = sketch(4, 128 * 100, CmtsLayout::default(), 5);
        let mut truth: HashMap<u32, u64> = HashMap::new();
        for k in left { a.increment(&k.to_le_bytes()); *truth.entry(*k).or_default() += 1; }
        for k in right { b.increment(&k.to_le_bytes()); *truth.entry(*k).or_default() += 1; }
        let merged = a.merge(&b).unwrap();
        for (k, t) in truth {
            prop_assert!(merged.point(&k.to_le_bytes()) >= t);
        }
    }
}
