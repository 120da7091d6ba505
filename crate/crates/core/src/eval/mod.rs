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

//! Error metrics and the memory-pressure sweep.
//!
//! Memory pressure is the ratio of a sketch's counter storage to the ideal
//! perfect-count size, which charges 4 bytes per distinct element and
//! nothing for the keys themselves.

mod report;
mod sweep;

pub use report::{write_csv, ErrorReport, RunMetadata, CSV_HEADER};
pub use sweep::{
    run_point, size_config, sweep, Execution, SweepOutcome, SweepPlan, SweepWarning, Variant,
    DEFAULT_DEPTH, DEFAULT_PRESSURES,
};

use crate::corpus::ExactCounts;
use crate::sketch::{bigram_key, Sketch};

/// Bytes charged per distinct element by the ideal storage size.
pub const IDEAL_BYTES_PER_ELEMENT: u64 = 4;

/// `4 * (distinct unigrams + distinct bigrams)`.
pub fn ideal_bytes(exact: &ExactCounts) -> u64 {
    IDEAL_BYTES_PER_ELEMENT * exact.distinct_count() as u64
}

/// Mean of `|estimate - truth| / truth` over `(estimate, truth)` pairs.
/// Zero for an empty input.
pub fn are<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    let (sum, n) = pairs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), (est, truth)| {
            (s + (est - truth).abs() / truth, n + 1)
        });
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Root of the mean squared difference over `(estimate, truth)` pairs.
pub fn rmse<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    let (sum, n) = pairs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), (est, truth)| {
            (s + (est - truth).powi(2), n + 1)
        });
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Natural-log pointwise mutual information with `p(i) = count_i / t_uni`
/// and `p(i, j) = count_ij / t_bi`. `None` when any count or total is zero.
pub fn pmi(count_ij: f64, count_i: f64, count_j: f64, t_uni: f64, t_bi: f64) -> Option<f64> {
    if count_ij <= 0.0 || count_i <= 0.0 || count_j <= 0.0 || t_uni <= 0.0 || t_bi <= 0.0 {
        return None;
    }
    Some(((count_ij / t_bi) / ((count_i / t_uni) * (count_j / t_uni))).ln())
}

/// RMSE between sketched and exact PMI over all distinct bigrams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmiError {
    pub rmse: f64,
    /// Bigrams left out because a sketched count was zero.
    pub excluded: u64,
}

/// Compares PMI computed from sketch estimates with PMI from exact counts.
/// Both sides use the exact stream lengths as totals.
pub fn pmi_rmse<U: Sketch + ?Sized, B: Sketch + ?Sized>(
    unigrams: &U,
    bigrams: &B,
    exact: &ExactCounts,
) -> PmiError {
    let uni: Vec<f64> = (0..exact.unigram_ids().map(|(id, _)| id + 1).max().unwrap_or(0))
        .map(|id| {
            if exact.unigram_count_by_id(id) == 0 {
                0.0
            } else {
                unigrams.estimate(exact.token(id).as_bytes())
            }
        })
        .collect();
    pmi_rmse_with(
        exact,
        |a| uni[a as usize],
        |a, b| bigrams.estimate(&bigram_key(exact.token(a), exact.token(b))),
    )
}

pub(crate) fn pmi_rmse_with(
    exact: &ExactCounts,
    uni: impl Fn(u32) -> f64,
    mut bi: impl FnMut(u32, u32) -> f64,
) -> PmiError {
    let t_uni = exact.total_unigrams() as f64;
    let t_bi = exact.total_bigrams() as f64;
    let mut excluded = 0;
    let mut sum = 0.0;
    let mut n = 0usize;
    for &(a, b, c) in exact.bigram_ids() {
        let truth = pmi(
            c as f64,
            exact.unigram_count_by_id(a) as f64,
            exact.unigram_count_by_id(b) as f64,
            t_uni,
            t_bi,
        );
        let est = pmi(bi(a, b), uni(a), uni(b), t_uni, t_bi);
        match (est, truth) {
            (Some(e), Some(t)) => {
                sum += (e - t).powi(2);
                n += 1;
            }
            _ => excluded += 1,
        }
    }
    PmiError {
        rmse: if n == 0 { 0.0 } else { (sum / n as f64).sqrt() },
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{exact_count, Corpus, ExactCounts, ZipfParams};
    use crate::sketch::{AnySketch, SketchConfig, VariantParams};
    use crate::CmtsLayout;
    use proptest::prelude::*;

    #[test]
    fn ideal_size() {
        let ec = exact_count(&["the", "cat", "the", "cat"]);
        assert_eq!(ideal_bytes(&ec), 16);
        assert_eq!(ideal_bytes(&exact_count(&["x"])), 4);
        // 14.7 million distinct elements take 58.8 * 10^6 bytes.
        assert_eq!(IDEAL_BYTES_PER_ELEMENT * 14_700_000, 58_800_000);
    }

    #[test]
    fn are_examples() {
        assert_eq!(are([(3.0, 3.0), (1.0, 1.0)]), 0.0);
        assert!((are([(12.0, 10.0)]) - 0.2).abs() < 1e-12);
        assert_eq!(are(std::iter::empty()), 0.0);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse([(5.0, 5.0)]), 0.0);
        assert!((rmse([(13.0, 10.0), (6.0, 10.0)]) - 12.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pmi_examples() {
        // p(i,j) = p(i) p(j): 1/16 = (1/4)(1/4).
        assert!(pmi(1.0, 1.0, 1.0, 4.0, 16.0).unwrap().abs() < 1e-12);
        let v = pmi(2.0, 2.0, 2.0, 4.0, 3.0).unwrap();
        assert!((v - (8.0f64 / 3.0).ln()).abs() < 1e-12);
        let doubled = pmi(4.0, 4.0, 4.0, 8.0, 6.0).unwrap();
        assert!((v - doubled).abs() < 1e-12);
        assert_eq!(pmi(0.0, 2.0, 2.0, 4.0, 3.0), None);
    }

    fn wide_sketches(
        ec: &ExactCounts,
        corpus: &Corpus,
        params: VariantParams,
    ) -> (AnySketch, AnySketch) {
        let width = ((ec.distinct_count() * 60) as u32).div_ceil(128) * 128;
        let mut uni = AnySketch::new(SketchConfig::new(4, width, 3, params).unwrap());
        let mut bi = AnySketch::new(SketchConfig::new(4, width, 3, params).unwrap());
        for t in corpus.tokens() {
            uni.update(t.as_bytes(), 1);
        }
        for w in corpus.ids().windows(2) {
            bi.update(&bigram_key(corpus.token(w[0]), corpus.token(w[1])), 1);
        }
        (uni, bi)
    }

    #[test]
    fn metrics_vanish_without_collisions() {
        let corpus = Corpus::from_zipf(ZipfParams {
            vocab: 500,
            exponent: 1.0,
            tokens: 5_000,
            seed: 6,
        })
        .unwrap();
        let ec = ExactCounts::from_corpus(&corpus);
        for params in [
            VariantParams::Cms,
            VariantParams::Cmts(CmtsLayout::default()),
        ] {
            let (uni, bi) = wide_sketches(&ec, &corpus, params);
            let pairs: Vec<(f64, f64)> = ec
                .keys()
                .enumerate()
                .map(|(i, (k, c))| {
                    let est = if i < ec.distinct_unigrams() {
                        uni.estimate(&k)
                    } else {
                        bi.estimate(&k)
                    };
                    (est, c as f64)
                })
                .collect();
            assert_eq!(are(pairs.iter().copied()), 0.0);
            assert_eq!(rmse(pairs.iter().copied()), 0.0);
            let p = pmi_rmse(&uni, &bi, &ec);
            assert_eq!(p.rmse, 0.0);
            assert_eq!(p.excluded, 0);
        }
    }

    #[test]
    fn pmi_rmse_stays_finite_when_bigrams_drop() {
        let corpus = Corpus::from_zipf(ZipfParams {
            vocab: 300,
            exponent: 1.0,
            tokens: 3_000,
            seed: 1,
        })
        .unwrap();
        let ec = ExactCounts::from_corpus(&corpus);
        let (uni, _) = wide_sketches(&ec, &corpus, VariantParams::Cms);
        let all = pmi_rmse_with(&ec, |a| uni.estimate(ec.token(a).as_bytes()), |_, _| 2.0);
        let mut skip_first = true;
        let fewer = pmi_rmse_with(
            &ec,
            |a| uni.estimate(ec.token(a).as_bytes()),
            |_, _| {
                if std::mem::take(&mut skip_first) {
                    0.0
                } else {
                    2.0
                }
            },
        );
        assert!(all.rmse.is_finite() && fewer.rmse.is_finite());
        assert_eq!(fewer.excluded, 1);
        assert!((all.rmse - fewer.rmse).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn pooled_are_is_count_weighted(
            a in prop::collection::vec((0.0f64..100.0, 1.0f64..50.0), 1..50),
            b in prop::collection::vec((0.0f64..100.0, 1.0f64..50.0), 1..50),
        ) {
            let pooled = are(a.iter().chain(&b).copied());
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let combined = (na * are(a.iter().copied()) + nb * are(b.iter().copied())) / (na + nb);
            prop_assert!((pooled - combined).abs() <= 1e-9 * pooled.max(1.0));
        }

        #[test]
        fn pmi_is_scale_invariant(ij in 1u32..100, i in 1u32..100, j in 1u32..100, k in 1u32..10) {
            let (t_uni, t_bi) = (1000.0, 999.0);
            let base = pmi(ij.into(), i.into(), j.into(), t_uni, t_bi).unwrap();
            let f = f64::from(k);
            let scaled = pmi(f64::from(ij) * f, f64::from(i) * f, f64::from(j) * f, t_uni * f, t_bi * f).unwrap();
            prop_assert!((base - scaled).abs() < 1e-9);
        }
    }
}
