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

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::report::{ErrorReport, RunMetadata};
use super::{are, pmi_rmse_with, rmse, IDEAL_BYTES_PER_ELEMENT};
use crate::cml::{CmlParams, CmlSketch};
use crate::cms::CmsSketch;
use crate::cmts::{CmtsLayout, CmtsSketch};
use crate::corpus::{Corpus, ExactCounts};
use crate::error::{Error, Result};
use crate::sketch::{push_bigram_key, Sketch, SketchConfig, VariantParams};

/// Rows per sketch in the sweep.
pub const DEFAULT_DEPTH: u32 = 4;

/// Memory pressures of the default sweep.
pub const DEFAULT_PRESSURES: [f64; 9] = [0.03, 0.06, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// The four sketch configurations compared by the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Linear, 32-bit cells.
    Cms,
    /// Logarithmic, 16-bit cells, base 1.00025.
    Cmls16,
    /// Logarithmic, 8-bit cells, base 1.08.
    Cmls8,
    /// Tree sketch, 128-counter blocks, 32-bit spire.
    Cmts,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Cms, Variant::Cmls16, Variant::Cmls8, Variant::Cmts];

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Cms => "CMS-CU",
            Variant::Cmls16 => "CMLS16-CU",
            Variant::Cmls8 => "CMLS8-CU",
            Variant::Cmts => "CMTS-CU",
        }
    }

    pub fn params(&self) -> VariantParams {
        match self {
            Variant::Cms => VariantParams::Cms,
            Variant::Cmls16 => VariantParams::Cml(CmlParams::CMLS16),
            Variant::Cmls8 => VariantParams::Cml(CmlParams::CMLS8),
            Variant::Cmts => VariantParams::Cmts(CmtsLayout::default()),
        }
    }

    /// Smallest width increment and the bytes it costs per row.
    fn unit(&self) -> (u32, usize) {
        match self {
            Variant::Cms => (1, 4),
            Variant::Cmls16 => (1, 2),
            Variant::Cmls8 => (1, 1),
            Variant::Cmts => {
                let layout = CmtsLayout::default();
                (layout.base_width(), layout.bytes_per_block())
            }
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Accepts the labels, case-insensitively, with or without `-CU`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase();
        let norm = norm.strip_suffix("-CU").unwrap_or(&norm);
        match norm {
            "CMS" => Ok(Variant::Cms),
            "CMLS16" | "CML16" => Ok(Variant::Cmls16),
            "CMLS8" | "CML8" => Ok(Variant::Cmls8),
            "CMTS" => Ok(Variant::Cmts),
            _ => Err(Error::invalid(format!("unknown variant {s:?}"))),
        }
    }
}

/// Config of `depth` rows whose counter storage is as close as the variant's
/// granularity allows to `target_bytes`. `None` when not even one unit per
/// row fits.
pub fn size_config(
    variant: Variant,
    target_bytes: f64,
    depth: u32,
    seed: u64,
) -> Option<SketchConfig> {
    let (unit_cells, unit_bytes) = variant.unit();
    let units = (target_bytes / (f64::from(depth) * unit_bytes as f64)).round();
    if units.is_nan() || units < 1.0 {
        return None;
    }
    let width = units * f64::from(unit_cells);
    if width > f64::from(u32::MAX) {
        return None;
    }
    SketchConfig::new(depth, width as u32, seed, variant.params()).ok()
}

/// What to sweep over.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub variants: Vec<Variant>,
    pub pressures: Vec<f64>,
    pub seeds: Vec<u64>,
    pub depth: u32,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            variants: Variant::ALL.to_vec(),
            pressures: DEFAULT_PRESSURES.to_vec(),
            seeds: vec![1, 2, 3],
            depth: DEFAULT_DEPTH,
        }
    }
}

impl SweepPlan {
    fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        if self.pressures.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invalid("pressures must be positive"));
        }
        if self.pressures.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("pressures must be sorted ascending"));
        }
        Ok(())
    }

    /// Every `(variant, pressure, seed)` point in output order.
    fn points(&self) -> Vec<(Variant, f64, u64)> {
        let mut variants = self.variants.clone();
        variants.sort();
        variants.dedup();
        let mut seeds = self.seeds.clone();
        seeds.sort();
        seeds.dedup();
        let mut out = Vec::new();
        for &v in &variants {
            for &p in &self.pressures {
                for &s in &seeds {
                    out.push((v, p, s));
                }
            }
        }
        out
    }
}

/// How sweep points are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Points run on a rayon pool; `threads` caps its size.
    #[cfg(feature = "parallel")]
    Parallel {
        threads: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel { threads: None }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

/// A point that produced no report or a report worth flagging.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepWarning {
    pub variant: Variant,
    pub pressure: f64,
    pub seed: u64,
    pub message: String,
}

impl fmt::Display for SweepWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} pressure={} seed={}: {}",
            self.variant, self.pressure, self.seed, self.message
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub reports: Vec<ErrorReport>,
    pub warnings: Vec<SweepWarning>,
}

/// Runs every point of `plan` against `corpus`. Reports come back sorted by
/// variant, pressure and seed whatever the execution mode.
pub fn sweep(
    corpus: &Corpus,
    exact: &ExactCounts,
    plan: &SweepPlan,
    source: &str,
    execution: Execution,
) -> Result<SweepOutcome> {
    plan.validate()?;
    let metadata = Arc::new(RunMetadata::new(source, exact, plan));
    let points = plan.points();
    let run = |&(variant, pressure, seed): &(Variant, f64, u64)| {
        run_point(
            corpus, exact, variant, pressure, seed, plan.depth, &metadata,
        )
    };
    let results: Vec<PointResult> = match execution {
        Execution::Sequential => points.iter().map(run).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { threads } => {
            let par = || points.par_iter().map(run).collect();
            match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
                    .install(par),
                None => par(),
            }
        }
    };
    let mut outcome = SweepOutcome::default();
    for r in results {
        outcome.warnings.extend(r.warnings);
        outcome.reports.extend(r.report);
    }
    Ok(outcome)
}

/// Outcome of a single sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub report: Option<ErrorReport>,
    pub warnings: Vec<SweepWarning>,
}

/// Builds, fills and scores the unigram and bigram sketches of one point.
pub fn run_point(
    corpus: &Corpus,
    exact: &ExactCounts,
    variant: Variant,
    pressure: f64,
    seed: u64,
    depth: u32,
    metadata: &Arc<RunMetadata>,
) -> PointResult {
    let warn = |message: String| SweepWarning {
        variant,
        pressure,
        seed,
        message,
    };
    let ideal_uni = IDEAL_BYTES_PER_ELEMENT * exact.distinct_unigrams() as u64;
    let ideal_bi = IDEAL_BYTES_PER_ELEMENT * exact.distinct_bigrams() as u64;
    let mut warnings = Vec::new();
    let mut configs = Vec::with_capacity(2);
    for (name, ideal) in [("unigram", ideal_uni), ("bigram", ideal_bi)] {
        let target = pressure * ideal as f64;
        let Some(config) = size_config(variant, target, depth, seed) else {
            warnings.push(warn(format!(
                "unreachable footprint: {name} target of {target:.0} bytes is below one unit per row"
            )));
            return PointResult {
                report: None,
                warnings,
            };
        };
        let realized = footprint(&config);
        if (realized as f64 - target).abs() > 0.02 * target {
            warnings.push(warn(format!(
                "{name} footprint {realized} bytes is more than 2% off the {target:.0} byte target"
            )));
        }
        configs.push(config);
    }
    let start = Instant::now();
    let scores = match variant {
        Variant::Cms => score::<CmsSketch>(corpus, exact, configs[0], configs[1], CmsSketch::new),
        Variant::Cmls16 | Variant::Cmls8 => {
            score::<CmlSketch>(corpus, exact, configs[0], configs[1], CmlSketch::new)
        }
        Variant::Cmts => {
            score::<CmtsSketch>(corpus, exact, configs[0], configs[1], CmtsSketch::new)
        }
    };
    let runtime_ms = start.elapsed().as_millis() as u64;
    if scores.pmi_excluded > 0 {
        warnings.push(warn(format!(
            "{} bigrams excluded from PMI: zero sketched count",
            scores.pmi_excluded
        )));
    }
    let report = ErrorReport {
        variant,
        pressure,
        sketch_bytes: (footprint(&configs[0]) + footprint(&configs[1])) as u64,
        ideal_bytes: ideal_uni + ideal_bi,
        depth,
        unigram_width: configs[0].width(),
        bigram_width: configs[1].width(),
        seed,
        are: scores.are,
        rmse: scores.rmse,
        pmi_rmse: scores.pmi_rmse,
        pmi_excluded: scores.pmi_excluded,
        runtime_ms,
        metadata: Arc::clone(metadata),
    };
    PointResult {
        report: Some(report),
        warnings,
    }
}

fn footprint(config: &SketchConfig) -> usize {
    let (unit_cells, unit_bytes) = match config.params() {
        VariantParams::Cms => (1, 4),
        VariantParams::Cml(p) => (1, usize::from(p.cell_bits() / 8)),
        VariantParams::Cmts(l) => (l.base_width() as usize, l.bytes_per_block()),
    };
    config.depth() as usize * (config.width() as usize / unit_cells) * unit_bytes
}

struct Scores {
    are: f64,
    rmse: f64,
    pmi_rmse: f64,
    pmi_excluded: u64,
}

fn score<S: Sketch>(
    corpus: &Corpus,
    exact: &ExactCounts,
    uni_config: SketchConfig,
    bi_config: SketchConfig,
    build: fn(SketchConfig) -> S,
) -> Scores {
    let mut uni = build(uni_config);
    let mut bi = build(bi_config);
    let vocab = corpus.vocab();
    let mut key = Vec::with_capacity(64);
    let mut prev: Option<u32> = None;
    for &id in corpus.ids() {
        uni.update(vocab[id as usize].as_bytes(), 1);
        if let Some(p) = prev {
            push_bigram_key(&mut key, &vocab[p as usize], &vocab[id as usize]);
            bi.update(&key, 1);
        }
        prev = Some(id);
    }

    let mut uni_est = vec![0.0; vocab.len()];
    for (id, _) in exact.unigram_ids() {
        uni_est[id as usize] = uni.estimate(vocab[id as usize].as_bytes());
    }
    let bi_est: Vec<f64> = exact
        .bigram_ids()
        .iter()
        .map(|&(a, b, _)| {
            push_bigram_key(&mut key, &vocab[a as usize], &vocab[b as usize]);
            bi.estimate(&key)
        })
        .collect();

    let pairs = || {
        exact
            .unigram_ids()
            .map(|(id, c)| (uni_est[id as usize], c as f64))
            .chain(
                exact
                    .bigram_ids()
                    .iter()
                    .zip(&bi_est)
                    .map(|(&(_, _, c), &e)| (e, c as f64)),
            )
    };
    let mut next = 0;
    let pmi = pmi_rmse_with(
        exact,
        |a| uni_est[a as usize],
        |_, _| {
            next += 1;
            bi_est[next - 1]
        },
    );
    Scores {
        are: are(pairs()),
        rmse: rmse(pairs()),
        pmi_rmse: pmi.rmse,
        pmi_excluded: pmi.excluded,
    }
}
