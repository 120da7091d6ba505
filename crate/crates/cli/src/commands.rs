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

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use tree_sketch::corpus::{self, Corpus, ExactCounts, TokenSource, ZipfParams};
use tree_sketch::eval::{self, Execution, RunMetadata, SweepPlan};
use tree_sketch::{AnySketch, CmlParams, CmtsLayout, Sketch, SketchConfig, VariantParams};

use crate::cli::{CountArgs, CountVariant, EvalArgs, GenZipfArgs, MergeArgs, QueryArgs, ZipfArgs};

/// Environment variable capping the number of sweep threads.
pub const THREADS_VAR: &str = "SKETCH_THREADS";

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_sketch(path: &Path) -> Result<AnySketch> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    AnySketch::from_bytes(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn zipf_params(args: &ZipfArgs, seed: u64) -> ZipfParams {
    ZipfParams {
        vocab: args.vocab,
        exponent: args.exponent,
        tokens: args.tokens,
        seed,
    }
}

/// `<path><suffix>`, keeping any extension already in `path`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn gen_zipf(args: &GenZipfArgs) -> Result<()> {
    let tokens = corpus::zipf_stream(zipf_params(&args.zipf, args.seed))?;
    let mut out = create(&args.out)?;
    for (i, t) in tokens.enumerate() {
        if i > 0 {
            out.write_all(b" ")?;
        }
        out.write_all(t.as_bytes())?;
    }
    out.flush()
        .with_context(|| format!("writing {}", args.out.display()))
}

fn count_params(args: &CountArgs) -> Result<VariantParams> {
    Ok(match args.variant {
        CountVariant::Cms => VariantParams::Cms,
        CountVariant::Cml => VariantParams::Cml(CmlParams::new(args.base, args.cell_bits)?),
        CountVariant::Cmls16 => VariantParams::Cml(CmlParams::CMLS16),
        CountVariant::Cmls8 => VariantParams::Cml(CmlParams::CMLS8),
        CountVariant::Cmts => {
            let layout = match args.levels {
                Some(levels) => CmtsLayout::new(args.block_width, levels, args.spire_bits)?,
                None => CmtsLayout::full_depth(args.block_width, args.spire_bits)?,
            };
            VariantParams::Cmts(layout)
        }
    })
}

/// Paths of the unigram and bigram sketches written by `count`.
pub fn count_outputs(prefix: &Path) -> (PathBuf, PathBuf) {
    (
        with_suffix(prefix, ".unigram.sketch"),
        with_suffix(prefix, ".bigram.sketch"),
    )
}

pub fn count(args: &CountArgs) -> Result<()> {
    let config = SketchConfig::new(args.depth, args.width, args.seed, count_params(args)?)?;
    let corpus = Corpus::from_file(&args.input)?;
    let mut uni = AnySketch::new(config);
    let mut bi = AnySketch::new(config);

    let start = Instant::now();
    let mut prev: Option<&str> = None;
    for token in corpus.tokens() {
        uni.update(token.as_bytes(), 1);
        if let Some(p) = prev {
            bi.update(&tree_sketch::bigram_key(p, token), 1);
        }
        prev = Some(token);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let updates = corpus.len() + corpus.len().saturating_sub(1);

    let (uni_path, bi_path) = count_outputs(&args.out);
    write_file(&uni_path, &uni.to_bytes())?;
    write_file(&bi_path, &bi.to_bytes())?;

    let exact = ExactCounts::from_corpus(&corpus);
    if let Some(path) = &args.exact_tsv {
        let mut out = create(path)?;
        exact
            .write_tsv(&mut out)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let rate = if elapsed > 0.0 {
        updates as f64 / elapsed
    } else {
        f64::INFINITY
    };
    println!(
        "tokens={} distinct_unigrams={} distinct_bigrams={} updates={} seconds={:.3} updates_per_s={:.0}",
        corpus.len(),
        exact.distinct_unigrams(),
        exact.distinct_bigrams(),
        updates,
        elapsed,
        rate
    );
    Ok(())
}

/// Sweep scheduling chosen by `SKETCH_THREADS`: unset uses every core, `1`
/// runs sequentially, `n` caps the pool at `n` threads.
pub fn execution(threads: Option<&str>) -> Result<Execution> {
    let Some(raw) = threads else {
        return Ok(Execution::default());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => bail!("{THREADS_VAR} must be a positive integer, got {raw:?}"),
    };
    if n == 1 {
        return Ok(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        Ok(Execution::Parallel { threads: Some(n) })
    }
    #[cfg(not(feature = "parallel"))]
    {
        log::warn!("built without the parallel feature; ignoring {THREADS_VAR}={n}");
        Ok(Execution::Sequential)
    }
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let source = match &args.input {
        Some(path) => TokenSource::TextFile(path.clone()),
        None => TokenSource::Zipf(zipf_params(&args.zipf, args.corpus_seed)),
    };
    let mut pressures = args.pressures.clone();
    pressures.sort_by(f64::total_cmp);
    pressures.dedup();
    let plan = SweepPlan {
        variants: args.variants.clone(),
        pressures,
        seeds: args.seeds.clone(),
        depth: args.depth,
    };
    let execution = execution(std::env::var(THREADS_VAR).ok().as_deref())?;

    log::info!("loading {}", source.describe());
    let corpus = source.load()?;
    let exact = ExactCounts::from_corpus(&corpus);
    log::info!(
        "{} tokens, {} distinct unigrams, {} distinct bigrams",
        corpus.len(),
        exact.distinct_unigrams(),
        exact.distinct_bigrams()
    );
    let outcome = eval::sweep(&corpus, &exact, &plan, &source.describe(), execution)?;

    let mut out = create(&args.out)?;
    eval::write_csv(&mut out, &outcome.reports, !args.omit_timing)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let metadata = RunMetadata::new(&source.describe(), &exact, &plan);
    let meta_path = with_suffix(&args.out, ".meta.json");
    let mut json = serde_json::to_vec_pretty(&metadata)?;
    json.push(b'\n');
    write_file(&meta_path, &json)?;

    let mut warnings = String::new();
    for w in &outcome.warnings {
        log::warn!("{w}");
        warnings.push_str(&w.to_string());
        warnings.push('\n');
    }
    write_file(&with_suffix(&args.out, ".warnings"), warnings.as_bytes())?;
    Ok(())
}

/// Sketch key of a query: one token, or a bigram of two tokens. The text is
/// tokenized the same way as counted input.
pub fn query_key(text: &str) -> Result<Vec<u8>> {
    let tokens = corpus::tokenize(text);
    match tokens.as_slice() {
        [t] => Ok(t.as_bytes().to_vec()),
        [a, b] => Ok(tree_sketch::bigram_key(a, b)),
        _ => bail!(
            "a key is one token or two tokens, got {} in {text:?}",
            tokens.len()
        ),
    }
}

pub fn query(args: &QueryArgs) -> Result<()> {
    let key = query_key(&args.key)?;
    let sketch = read_sketch(&args.sketch)?;
    println!("{}", sketch.format_estimate(&key));
    Ok(())
}

pub fn merge(args: &MergeArgs) -> Result<()> {
    let a = read_sketch(&args.a)?;
    let b = read_sketch(&args.b)?;
    let merged = a
        .merge(&b)
        .with_context(|| format!("merging {} and {}", args.a.display(), args.b.display()))?;
    write_file(&args.out, &merged.to_bytes())
}
