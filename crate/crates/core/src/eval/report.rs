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

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::sweep::{SweepPlan, Variant};
use super::IDEAL_BYTES_PER_ELEMENT;
use crate::cml::CmlParams;
use crate::cmts::{CmtsLayout, MergePolicy};
use crate::corpus::ExactCounts;

pub const CSV_HEADER: &str =
    "variant,pressure,sketch_bytes,ideal_bytes,depth,width,seed,are,rmse,pmi_rmse,runtime_ms";

/// Errors of one variant at one memory pressure and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub variant: Variant,
    pub pressure: f64,
    /// Counter storage of the unigram and bigram sketches together.
    pub sketch_bytes: u64,
    pub ideal_bytes: u64,
    pub depth: u32,
    pub unigram_width: u32,
    pub bigram_width: u32,
    pub seed: u64,
    pub are: f64,
    pub rmse: f64,
    pub pmi_rmse: f64,
    pub pmi_excluded: u64,
    pub runtime_ms: u64,
    pub metadata: Arc<RunMetadata>,
}

impl ErrorReport {
    /// One CSV line (no newline). The `width` column is the bigram sketch
    /// width; `runtime_ms` is written as 0 when `timing` is off so that
    /// repeated runs are byte-identical.
    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.variant.label(),
            self.pressure,
            self.sketch_bytes,
            self.ideal_bytes,
            self.depth,
            self.bigram_width,
            self.seed,
            self.are,
            self.rmse,
            self.pmi_rmse,
            if timing { self.runtime_ms } else { 0 }
        )
    }
}

pub fn write_csv<W: Write>(
    mut out: W,
    reports: &[ErrorReport],
    timing: bool,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row(timing))?;
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmlSetting {
    pub base: f64,
    pub cell_bits: u8,
}

impl From<CmlParams> for CmlSetting {
    fn from(p: CmlParams) -> Self {
        CmlSetting {
            base: p.base(),
            cell_bits: p.cell_bits(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmtsSetting {
    pub base_width: u32,
    pub levels: u8,
    pub spire_bits: u8,
    pub bytes_per_block: usize,
}

/// Every modelling choice behind a sweep, so a CSV can be re-derived.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub source: String,
    pub tokens: u64,
    pub distinct_unigrams: usize,
    pub distinct_bigrams: usize,
    pub variants: Vec<&'static str>,
    pub pressures: Vec<f64>,
    pub seeds: Vec<u64>,
    pub seed_role: &'static str,
    pub depth: u32,
    pub hash: &'static str,
    pub cell_mapping: &'static str,
    pub update_semantics: &'static str,
    pub bigram_key_separator: &'static str,
    pub cms_cell_bits: u8,
    pub saturation: &'static str,
    pub cml_decode: &'static str,
    pub cml_fire_probability: &'static str,
    pub cml_rng: &'static str,
    pub cml_conservative_update: &'static str,
    pub cmls16: CmlSetting,
    pub cmls8: CmlSetting,
    pub cmts: CmtsSetting,
    pub cmts_bit_layout: &'static str,
    pub cmts_lsb_rule: &'static str,
    pub cmts_conflict_write: &'static str,
    pub cmts_conservative_update: &'static str,
    pub cmts_merge_policy: &'static str,
    pub tokenizer: &'static str,
    pub bigram_window: u32,
    pub document_model: &'static str,
    pub are_key_set: &'static str,
    pub ideal_bytes_per_element: u64,
    pub sketch_sizing: &'static str,
    pub footprint: &'static str,
    pub csv_width_column: &'static str,
    pub pmi: &'static str,
}

impl RunMetadata {
    pub fn new(source: &str, exact: &ExactCounts, plan: &SweepPlan) -> Self {
        let layout = CmtsLayout::default();
        let mut variants = plan.variants.clone();
        variants.sort();
        variants.dedup();
        RunMetadata {
            source: source.to_owned(),
            tokens: exact.total_unigrams(),
            distinct_unigrams: exact.distinct_unigrams(),
            distinct_bigrams: exact.distinct_bigrams(),
            variants: variants.iter().map(Variant::label).collect(),
            pressures: plan.pressures.clone(),
            seeds: plan.seeds.clone(),
            seed_role: "sweep seed seeds row hashes and the log-counter random stream; the corpus is fixed",
            depth: plan.depth,
            hash: "64-bit multiply/xor-shift over little-endian 8-byte words, SplitMix64 finalizer; row seed = splitmix(seed ^ splitmix((row + 1) * golden))",
            cell_mapping: "hash mod width",
            update_semantics: "update(key, n) = n conservative single increments; linear sketch uses the equivalent max(cell, min + n)",
            bigram_key_separator: "0x1F",
            cms_cell_bits: 32,
            saturation: "silent clamp at the largest representable value",
            cml_decode: "0 -> 0, 1 -> 1, c -> (base^c - 1) / (base - 1)",
            cml_fire_probability: "base^-c at the minimum exponent c",
            cml_rng: "one ChaCha8 stream per sketch, seeded from the sketch seed, one draw per increment",
            cml_conservative_update: "rows at the minimum exponent advance together on one shared draw",
            cmls16: CmlParams::CMLS16.into(),
            cmls8: CmlParams::CMLS8.into(),
            cmts: CmtsSetting {
                base_width: layout.base_width(),
                levels: layout.levels(),
                spire_bits: layout.spire_bits(),
                bytes_per_block: layout.bytes_per_block(),
            },
            cmts_bit_layout: "counting layer l: W >> l bits; barrier level l: max(W >> (l + 1), 1) bits; top barrier guards the spire; full depth L = log2(W) + 1",
            cmts_lsb_rule: "nb = min(L, bit_length((v + 2) div 4)), bit_length(0) = 0",
            cmts_conflict_write: "counting bits overwritten, barrier bits OR-ed",
            cmts_conservative_update: "rows decoding below min + 1 are written with min + 1",
            cmts_merge_policy: MergePolicy::Ascending.name(),
            tokenizer: "lowercase, split on every non-alphanumeric code point, drop empty segments",
            bigram_window: 2,
            document_model: "single document: bigrams cross line and sentence boundaries",
            are_key_set: "all distinct unigrams and bigrams, pooled",
            ideal_bytes_per_element: IDEAL_BYTES_PER_ELEMENT,
            sketch_sizing: "separate unigram and bigram sketches, each sized to pressure x its own ideal bytes; fixed depth, width carries the footprint; tree sketch widths rounded to whole blocks",
            footprint: "counter storage only; serialization header excluded",
            csv_width_column: "bigram sketch width",
            pmi: "natural log; p(i) = c_i / T_uni, p(i,j) = c_ij / T_bi; totals from exact stream lengths on both sides",
        }
    }
}
