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

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use tree_sketch::eval::{Variant, DEFAULT_DEPTH};

#[derive(Debug, Parser)]
#[command(
    name = "tree-sketch",
    version,
    about = "Count-min tree sketches and their baselines"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file whose keys expand to flags of the subcommand; flags given
    /// on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic Zipf token stream.
    #[command(args_override_self = true)]
    GenZipf(GenZipfArgs),
    /// Count the unigrams and bigrams of a text file into two sketches.
    #[command(args_override_self = true)]
    Count(CountArgs),
    /// Sweep memory pressures and report sketch errors as CSV.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Print the estimate of a key.
    #[command(args_override_self = true)]
    Query(QueryArgs),
    /// Merge two tree sketches with identical configurations.
    #[command(args_override_self = true)]
    Merge(MergeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ZipfArgs {
    /// Vocabulary size.
    #[arg(long, default_value_t = 100_000)]
    pub vocab: u64,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Number of tokens.
    #[arg(long, default_value_t = 5_000_000)]
    pub tokens: u64,
}

#[derive(Debug, Args)]
pub struct GenZipfArgs {
    #[command(flatten)]
    pub zipf: ZipfArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountVariant {
    Cms,
    /// Logarithmic cells with `--base` and `--cell-bits`.
    Cml,
    Cmls16,
    Cmls8,
    Cmts,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Text file; tokens are lowercased alphanumeric runs.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = CountVariant::Cmts)]
    pub variant: CountVariant,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u32,
    /// Counters per row; a multiple of `--block-width` for cmts.
    #[arg(long, default_value_t = 1 << 16)]
    pub width: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Logarithm base of cml cells.
    #[arg(long, default_value_t = 1.08)]
    pub base: f64,
    /// Bits per cml cell (8 or 16).
    #[arg(long, default_value_t = 8)]
    pub cell_bits: u8,
    /// Counters per cmts block.
    #[arg(long, default_value_t = 128)]
    pub block_width: u32,
    /// Barrier levels per cmts block; defaults to the full depth of the block.
    #[arg(long)]
    pub levels: Option<u8>,
    /// Spire bits per cmts block.
    #[arg(long, default_value_t = 32)]
    pub spire_bits: u8,
    /// Output prefix; writes `<prefix>.unigram.sketch` and `<prefix>.bigram.sketch`.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
    /// Also write the exact counts as TSV.
    #[arg(long, value_name = "FILE")]
    pub exact_tsv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Text file to evaluate on; without it a Zipf corpus is generated.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub zipf: ZipfArgs,
    /// Seed of the generated corpus.
    #[arg(long, default_value_t = 1)]
    pub corpus_seed: u64,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', value_parser = parse_variant,
          default_value = "cms,cmls16,cmls8,cmts")]
    pub variants: Vec<Variant>,
    /// Sketch bytes as multiples of the ideal storage size.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', value_parser = parse_pressure,
          default_value = "0.03,0.06,0.125,0.25,0.5,1,2,4,8")]
    pub pressures: Vec<f64>,
    /// Sketch seeds; each point is run once per seed.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u32,
    /// CSV output; sidecars `<out>.meta.json` and `<out>.warnings` are written next to it.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Write 0 in the runtime column so reruns are byte-identical.
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, value_name = "FILE")]
    pub sketch: PathBuf,
    /// Token, or two tokens separated by a space for a bigram.
    #[arg(long)]
    pub key: String,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long, value_name = "FILE")]
    pub a: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub b: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: tree_sketch::Error| e.to_string())
}

fn parse_pressure(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(p) if p.is_finite() && p > 0.0 => Ok(p),
        Ok(p) => Err(format!("pressure must be positive, got {p}")),
        Err(_) => Err(format!("not a number: {s:?}")),
    }
}
