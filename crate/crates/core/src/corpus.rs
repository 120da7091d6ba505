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

//! Token streams and their exact counts.
//!
//! A stream is either a UTF-8 text file or a synthetic sequence of i.i.d.
//! Zipf draws over a vocabulary `w1..wV`. Streams are interned into a
//! [`Corpus`] (token ids plus a vocabulary) so that the sweep can replay
//! them many times. Bigrams are adjacent pairs over the whole stream; a
//! file is a single document.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;

use crate::error::{Error, Result};
use crate::sketch::{bigram_key, push_bigram_key};

/// Lowercases `text` and splits it on every non-alphanumeric code point,
/// dropping empty segments.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// [`tokenize`] over raw bytes, rejecting invalid UTF-8.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<String>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize(text))
}

/// Adjacent token pairs as bigram keys.
pub fn bigrams<S: AsRef<str>>(tokens: &[S]) -> Vec<Vec<u8>> {
    tokens
        .windows(2)
        .map(|w| bigram_key(w[0].as_ref(), w[1].as_ref()))
        .collect()
}

/// Parameters of a synthetic Zipf stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfParams {
    pub vocab: u64,
    pub exponent: f64,
    pub tokens: u64,
    pub seed: u64,
}

impl Default for ZipfParams {
    /// 10^5 types, exponent 1, 5 * 10^6 tokens.
    fn default() -> Self {
        ZipfParams {
            vocab: 100_000,
            exponent: 1.0,
            tokens: 5_000_000,
            seed: 1,
        }
    }
}

impl ZipfParams {
    fn validate(&self) -> Result<()> {
        if self.vocab == 0 {
            return Err(Error::invalid("vocabulary size must be at least 1"));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(Error::invalid(format!(
                "Zipf exponent must be positive, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

/// Ranks in `1..=vocab` drawn with probability proportional to `rank^-s`.
pub fn zipf_ranks(params: ZipfParams) -> Result<impl Iterator<Item = u64>> {
    params.validate()?;
    let dist = Zipf::new(params.vocab as f64, params.exponent)
        .map_err(|e| Error::invalid(format!("Zipf distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..params.tokens).map(move |_| rng.sample(dist) as u64))
}

/// Zipf stream rendered as tokens `w<rank>`.
pub fn zipf_stream(params: ZipfParams) -> Result<impl Iterator<Item = String>> {
    Ok(zipf_ranks(params)?.map(|r| format!("w{r}")))
}

/// Where a corpus comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenSource {
    TextFile(PathBuf),
    Zipf(ZipfParams),
}

impl TokenSource {
    pub fn load(&self) -> Result<Corpus> {
        match self {
            TokenSource::TextFile(path) => Corpus::from_file(path),
            TokenSource::Zipf(params) => Corpus::from_zipf(*params),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TokenSource::TextFile(path) => format!("file {}", path.display()),
            TokenSource::Zipf(p) => format!(
                "zipf vocab={} exponent={} tokens={} seed={}",
                p.vocab, p.exponent, p.tokens, p.seed
            ),
        }
    }
}

/// An interned token stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    vocab: Vec<String>,
    ids: Vec<u32>,
}

impl Corpus {
    /// Interns tokens in first-seen order.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut vocab = Vec::new();
        let ids = tokens
            .into_iter()
            .map(|t| {
                let t = t.as_ref();
                if let Some(&id) = index.get(t) {
                    return id;
                }
                let id = vocab.len() as u32;
                vocab.push(t.to_owned());
                index.insert(t.to_owned(), id);
                id
            })
            .collect();
        Corpus { vocab, ids }
    }

    pub fn from_text(text: &str) -> Self {
        Self::from_tokens(tokenize(text))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_tokens(tokenize_bytes(&bytes)?))
    }

    /// Synthetic corpus; token id `r - 1` is `w<r>`.
    pub fn from_zipf(params: ZipfParams) -> Result<Self> {
        if params.vocab > u64::from(u32::MAX) {
            return Err(Error::invalid("vocabulary too large"));
        }
        let ids = zipf_ranks(params)?.map(|r| (r - 1) as u32).collect();
        let vocab = (1..=params.vocab).map(|r| format!("w{r}")).collect();
        Ok(Corpus { vocab, ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids.iter().map(|&id| self.token(id))
    }

    /// Writes the tokens separated by single spaces.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, t) in self.tokens().enumerate() {
            if i > 0 {
                out.write_all(b" ")?;
            }
            out.write_all(t.as_bytes())?;
        }
        out.flush()
    }
}

/// Exact unigram and bigram multiplicities of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    unigrams: Vec<u64>,
    bigrams: Vec<(u32, u32, u64)>,
    total_unigrams: u64,
    total_bigrams: u64,
    distinct_unigrams: usize,
}

impl ExactCounts {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut unigrams = vec![0u64; corpus.vocab.len()];
        for &id in &corpus.ids {
            unigrams[id as usize] += 1;
        }
        let mut pairs: HashMap<u64, u64> = HashMap::new();
        for w in corpus.ids.windows(2) {
            *pairs
                .entry(u64::from(w[0]) << 32 | u64::from(w[1]))
                .or_default() += 1;
        }
        let mut bigrams: Vec<(u32, u32, u64)> = pairs
            .into_iter()
            .map(|(k, c)| ((k >> 32) as u32, k as u32, c))
            .collect();
        bigrams.sort_unstable();
        let index = corpus
            .vocab
            .iter()
            .enumerate()
            .map(|(id, t)| (t.clone(), id as u32))
            .collect();
        ExactCounts {
            vocab: corpus.vocab.clone(),
            index,
            distinct_unigrams: unigrams.iter().filter(|&&c| c > 0).count(),
            unigrams,
            bigrams,
            total_unigrams: corpus.ids.len() as u64,
            total_bigrams: corpus.ids.len().saturating_sub(1) as u64,
        }
    }

    pub fn total_unigrams(&self) -> u64 {
        self.total_unigrams
    }

    pub fn total_bigrams(&self) -> u64 {
        self.total_bigrams
    }

    pub fn distinct_unigrams(&self) -> usize {
        self.distinct_unigrams
    }

    pub fn distinct_bigrams(&self) -> usize {
        self.bigrams.len()
    }

    /// Distinct unigrams plus distinct bigrams.
    pub fn distinct_count(&self) -> usize {
        self.distinct_unigrams + self.bigrams.len()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    /// `(token id, count)` for every observed unigram, by id.
    pub fn unigram_ids(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.unigrams
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(id, &c)| (id as u32, c))
    }

    /// `(first id, second id, count)` for every observed bigram, sorted by ids.
    pub fn bigram_ids(&self) -> &[(u32, u32, u64)] {
        &self.bigrams
    }

    pub fn unigram_count_by_id(&self, id: u32) -> u64 {
        self.unigrams.get(id as usize).copied().unwrap_or(0)
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.unigram_ids().map(|(id, c)| (self.token(id), c))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.bigrams
            .iter()
            .map(|&(a, b, c)| (self.token(a), self.token(b), c))
    }

    pub fn unigram(&self, token: &str) -> u64 {
        self.index
            .get(token)
            .map_or(0, |&id| self.unigram_count_by_id(id))
    }

    pub fn bigram(&self, first: &str, second: &str) -> u64 {
        let (Some(&a), Some(&b)) = (self.index.get(first), self.index.get(second)) else {
            return 0;
        };
        self.bigrams
            .binary_search_by(|&(x, y, _)| (x, y).cmp(&(a, b)))
            .map_or(0, |i| self.bigrams[i].2)
    }

    /// Every distinct key with its count: unigrams first, then bigram keys.
    pub fn keys(&self) -> impl Iterator<Item = (Vec<u8>, u64)> + '_ {
        let uni = self.unigrams().map(|(t, c)| (t.as_bytes().to_vec(), c));
        let mut buf = Vec::new();
        let bi = self.bigrams().map(move |(a, b, c)| {
            push_bigram_key(&mut buf, a, b);
            (buf.clone(), c)
        });
        uni.chain(bi)
    }

    /// Writes `key<TAB>count` lines, bigrams rendered as `first second`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (t, c) in self.unigrams() {
            writeln!(out, "{t}\t{c}")?;
        }
        for (a, b, c) in self.bigrams() {
            writeln!(out, "{a} {b}\t{c}")?;
        }
        out.flush()
    }
}

/// Exact counts of a token sequence.
pub fn exact_count<S: AsRef<str>>(tokens: &[S]) -> ExactCounts {
    ExactCounts::from_corpus(&Corpus::from_tokens(tokens))
}
