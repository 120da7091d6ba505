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

//! Count-min tree sketch.
//!
//! Every row is a sequence of blocks; a key's cell `j` in a row lives in
//! block `j / W` at offset `j % W`. Increments read the value of the key's
//! counter in every row, then write `min + 1` into the rows that are below
//! it. Writes overwrite shared counting bits, so a counter that conflicts
//! with a neighbour may read more than its own count, and a counter's value
//! may move when a neighbour sharing its upper bits is written.

mod block;
mod layout;

use crate::error::{Error, Result};
use crate::sketch::{Key, Sketch, SketchConfig, VariantParams};

pub use block::CmtsBlock;
pub(crate) use layout::Geometry;
pub use layout::{CmtsLayout, MAX_LEVELS};

/// How [`CmtsSketch::merge`] writes summed counters back into a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MergePolicy {
    /// Ascending by summed value, ties by offset, into a zeroed block.
    Ascending = 0,
}

impl MergePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            MergePolicy::Ascending => "ascending",
        }
    }
}

/// Bytes taken by a tree sketch with `config`: counter storage plus the
/// serialization header.
pub fn memory_bytes(config: &SketchConfig) -> Result<usize> {
    let VariantParams::Cmts(layout) = config.params() else {
        return Err(Error::invalid("not a tree sketch config"));
    };
    Ok(payload_bytes(config, layout) + crate::codec::header_len(config))
}

pub(crate) fn payload_bytes(config: &SketchConfig, layout: &CmtsLayout) -> usize {
    let blocks = (config.width() / layout.base_width()) as usize;
    config.depth() as usize * blocks * layout.bytes_per_block()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmtsSketch {
    config: SketchConfig,
    geom: Geometry,
    blocks_per_row: usize,
    words: Vec<u64>,
}

#[derive(Clone, Copy)]
struct Slot {
    start: usize,
    offset: u32,
}

impl CmtsSketch {
    /// # Panics
    ///
    /// Panics if `config` is not a tree sketch config.
    pub fn new(config: SketchConfig) -> Self {
        let VariantParams::Cmts(layout) = *config.params() else {
            panic!("not a tree sketch config");
        };
        let geom = Geometry::new(layout);
        let blocks_per_row = (config.width() / layout.base_width()) as usize;
        let words = vec![0; config.depth() as usize * blocks_per_row * geom.words];
        CmtsSketch {
            config,
            geom,
            blocks_per_row,
            words,
        }
    }

    pub fn layout(&self) -> &CmtsLayout {
        &self.geom.layout
    }

    pub fn merge_policy(&self) -> MergePolicy {
        MergePolicy::Ascending
    }

    /// Largest value a counter can hold.
    pub fn max_value(&self) -> u64 {
        self.geom.max_value
    }

    pub(crate) fn block_count(&self) -> usize {
        self.config.depth() as usize * self.blocks_per_row
    }

    pub(crate) fn block_words(&self, index: usize) -> &[u64] {
        let w = self.geom.words;
        &self.words[index * w..(index + 1) * w]
    }

    pub(crate) fn block_words_mut(&mut self, index: usize) -> &mut [u64] {
        let w = self.geom.words;
        &mut self.words[index * w..(index + 1) * w]
    }

    #[inline]
    fn slot(&self, cell: usize) -> Slot {
        let base = self.geom.layout.base_width() as usize;
        Slot {
            start: (cell / base) * self.geom.words,
            offset: (cell % base) as u32,
        }
    }

    #[inline]
    fn read(&self, s: Slot) -> u64 {
        self.geom
            .decode(&self.words[s.start..s.start + self.geom.words], s.offset)
    }

    #[inline]
    fn write(&mut self, s: Slot, value: u64) {
        let w = self.geom.words;
        self.geom
            .encode(&mut self.words[s.start..s.start + w], s.offset, value);
    }

    fn slots(&self, key: &Key, out: &mut [Slot]) {
        let mut cells = [0usize; 8];
        let d = self.config.depth() as usize;
        if d <= cells.len() {
            self.config.flat_cells(key, &mut cells[..d]);
            for (o, &c) in out.iter_mut().zip(&cells[..d]) {
                *o = self.slot(c);
            }
        } else {
            let mut cells = vec![0; d];
            self.config.flat_cells(key, &mut cells);
            for (o, c) in out.iter_mut().zip(cells) {
                *o = self.slot(c);
            }
        }
    }

    /// Decoded value of `key`'s counter in each row.
    pub fn row_values(&self, key: &Key) -> Vec<u64> {
        let mut slots = vec![
            Slot {
                start: 0,
                offset: 0
            };
            self.config.depth() as usize
        ];
        self.slots(key, &mut slots);
        slots.iter().map(|&s| self.read(s)).collect()
    }

    /// Minimum over rows of the decoded counter values.
    pub fn point(&self, key: &Key) -> u64 {
        let d = self.config.depth() as usize;
        if d > 8 {
            return self.row_values(key).into_iter().min().unwrap_or(0);
        }
        let mut slots = [Slot {
            start: 0,
            offset: 0,
        }; 8];
        self.slots(key, &mut slots[..d]);
        slots[..d].iter().map(|&s| self.read(s)).min().unwrap_or(0)
    }

    /// One conservative increment: rows below `min + 1` are raised to it.
    pub fn increment(&mut self, key: &Key) {
        let d = self.config.depth() as usize;
        let mut buf = [Slot {
            start: 0,
            offset: 0,
        }; 8];
        let mut heap;
        let slots: &mut [Slot] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            heap = vec![
                Slot {
                    start: 0,
                    offset: 0
                };
                d
            ];
            &mut heap
        };
        self.slots(key, slots);
        let mut values = [0u64; 8];
        let mut heap_values;
        let values: &mut [u64] = if d <= values.len() {
            &mut values[..d]
        } else {
            heap_values = vec![0; d];
            &mut heap_values
        };
        for (v, &s) in values.iter_mut().zip(slots.iter()) {
            *v = self.read(s);
        }
        let min = values.iter().copied().min().unwrap_or(0);
        if min >= self.geom.max_value {
            return;
        }
        let target = min + 1;
        for (&v, &s) in values.iter().zip(slots.iter()) {
            if v < target {
                self.write(s, target);
            }
        }
    }

    /// Sums two sketches counter by counter.
    ///
    /// For every block, all counters of both inputs are decoded, summed
    /// (clamped at the maximum) and written into a zeroed block in ascending
    /// order of the sums, ties broken by offset. The result is symmetric in
    /// its arguments, and merging with an empty sketch reproduces every
    /// decoded value.
    pub fn merge(&self, other: &CmtsSketch) -> Result<CmtsSketch> {
        self.config.ensure_same(&other.config)?;
        let mut out = CmtsSketch::new(self.config);
        let base = self.geom.layout.base_width() as usize;
        let mut sums: Vec<(u64, u32)> = Vec::with_capacity(base);
        for b in 0..self.block_count() {
            let left = self.block_words(b);
            let right = other.block_words(b);
            sums.clear();
            for i in 0..base as u32 {
                let s = self
                    .geom
                    .decode(left, i)
                    .saturating_add(self.geom.decode(right, i));
                sums.push((s.min(self.geom.max_value), i));
            }
            sums.sort_unstable();
            let geom = &self.geom;
            let dst = out.block_words_mut(b);
            for &(s, i) in &sums {
                geom.encode(dst, i, s);
            }
        }
        Ok(out)
    }

    /// Decoded values of every counter in row `row`, block `block`.
    pub fn block_values(&self, row: u32, block: usize) -> Vec<u64> {
        let words = self.block_words(row as usize * self.blocks_per_row + block);
        (0..self.geom.layout.base_width())
            .map(|i| self.geom.decode(words, i))
            .collect()
    }

    /// Every barrier bit of the sketch, packed block by block.
    pub fn barrier_words(&self) -> Vec<u64> {
        let mask = self.geom.barrier_mask();
        self.words
            .chunks_exact(self.geom.words)
            .flat_map(|block| block.iter().zip(&mask).map(|(w, m)| w & m))
            .collect()
    }

    pub(crate) fn words_per_block(&self) -> usize {
        self.geom.words
    }
}

impl Sketch for CmtsSketch {
    fn config(&self) -> &SketchConfig {
        &self.config
    }

    fn estimate(&self, key: &Key) -> f64 {
        self.point(key) as f64
    }

    fn update(&mut self, key: &Key, count: u64) {
        for _ in 0..count {
            self.increment(key);
        }
    }

    fn memory_bytes(&self) -> usize {
        payload_bytes(&self.config, &self.geom.layout)
    }
}

#[cfg(test)]
mod tests;
