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

use crate::cml::{CmlParams, CmlSketch};
use crate::cms::CmsSketch;
use crate::cmts::{CmtsLayout, CmtsSketch};
use crate::error::{Error, Result};
use crate::hash::{hash_bytes, row_seed};

/// Byte placed between the two tokens of a bigram key.
///
/// Tokenization splits on every non-alphanumeric code point, so this byte
/// never occurs inside a token and the encoding is injective.
pub const BIGRAM_SEPARATOR: u8 = 0x1F;

/// An event identity: a token, or a bigram encoded with [`bigram_key`].
pub type Key = [u8];

/// Encodes the pair `(first, second)` as `first 0x1F second`.
pub fn bigram_key(first: &str, second: &str) -> Vec<u8> {
    let mut key = Vec::with_capacity(first.len() + second.len() + 1);
    push_bigram_key(&mut key, first, second);
    key
}

pub(crate) fn push_bigram_key(buf: &mut Vec<u8>, first: &str, second: &str) {
    buf.clear();
    buf.extend_from_slice(first.as_bytes());
    buf.push(BIGRAM_SEPARATOR);
    buf.extend_from_slice(second.as_bytes());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum VariantTag {
    Cms = 0x01,
    Cml = 0x02,
    Cmts = 0x03,
}

impl TryFrom<u8> for VariantTag {
    type Error = Error;

    fn try_from(tag: u8) -> Result<Self> {
        match tag {
            0x01 => Ok(VariantTag::Cms),
            0x02 => Ok(VariantTag::Cml),
            0x03 => Ok(VariantTag::Cmts),
            other => Err(Error::UnknownVariant(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantParams {
    Cms,
    Cml(CmlParams),
    Cmts(CmtsLayout),
}

impl VariantParams {
    pub fn tag(&self) -> VariantTag {
        match self {
            VariantParams::Cms => VariantTag::Cms,
            VariantParams::Cml(_) => VariantTag::Cml,
            VariantParams::Cmts(_) => VariantTag::Cmts,
        }
    }
}

/// Shape and identity of a sketch: `depth` hash rows of `width` counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchConfig {
    depth: u32,
    width: u32,
    seed: u64,
    params: VariantParams,
}

impl SketchConfig {
    /// Validates and builds a config. A tree sketch needs `width` to be a
    /// multiple of its block base width.
    pub fn new(depth: u32, width: u32, seed: u64, params: VariantParams) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        if width == 0 {
            return Err(Error::invalid("width must be at least 1"));
        }
        match &params {
            VariantParams::Cms => {}
            VariantParams::Cml(p) => p.validate()?,
            VariantParams::Cmts(layout) => {
                layout.validate()?;
                if !width.is_multiple_of(layout.base_width()) {
                    return Err(Error::invalid(format!(
                        "width {width} is not a multiple of the block base width {}",
                        layout.base_width()
                    )));
                }
            }
        }
        Ok(SketchConfig {
            depth,
            width,
            seed,
            params,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &VariantParams {
        &self.params
    }

    /// Number of cells across all rows.
    pub fn cells(&self) -> usize {
        self.depth as usize * self.width as usize
    }

    /// Maps `key` to its cell in `row`.
    ///
    /// # Panics
    ///
    /// Panics if `row >= depth`.
    #[inline]
    pub fn hash_cell(&self, key: &Key, row: u32) -> RowIndex {
        assert!(
            row < self.depth,
            "row {row} out of range for depth {}",
            self.depth
        );
        let h = hash_bytes(key, row_seed(self.seed, row));
        RowIndex {
            row,
            cell: (h % u64::from(self.width)) as u32,
        }
    }

    /// Flat indices (`row * width + cell`) of `key` in every row, written into `out`.
    #[inline]
    pub(crate) fn flat_cells(&self, key: &Key, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.depth as usize);
        let width = self.width as usize;
        for (row, slot) in out.iter_mut().enumerate() {
            let h = hash_bytes(key, row_seed(self.seed, row as u32));
            *slot = row * width + (h % self.width as u64) as usize;
        }
    }

    pub(crate) fn ensure_same(&self, other: &SketchConfig) -> Result<()> {
        if self != other {
            return Err(Error::IncompatibleSketches(format!(
                "configs differ: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// A cell address inside a sketch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowIndex {
    pub row: u32,
    pub cell: u32,
}

/// Common interface of every sketch variant.
pub trait Sketch {
    fn config(&self) -> &SketchConfig;

    /// Point estimate of the count of `key`: the minimum over rows of the
    /// decoded cell values.
    fn estimate(&self, key: &Key) -> f64;

    /// Applies `count` conservative increments of `key`.
    fn update(&mut self, key: &Key, count: u64);

    /// Bytes of counter storage, excluding the serialization header.
    fn memory_bytes(&self) -> usize;
}

/// A sketch of any variant, as read back from the binary format.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySketch {
    Cms(CmsSketch),
    Cml(CmlSketch),
    Cmts(CmtsSketch),
}

impl AnySketch {
    /// Builds an empty sketch of the variant named by `config`.
    pub fn new(config: SketchConfig) -> Self {
        match config.params {
            VariantParams::Cms => AnySketch::Cms(CmsSketch::new(config)),
            VariantParams::Cml(_) => AnySketch::Cml(CmlSketch::new(config)),
            VariantParams::Cmts(_) => AnySketch::Cmts(CmtsSketch::new(config)),
        }
    }

    pub fn tag(&self) -> VariantTag {
        self.config().params.tag()
    }

    fn inner(&self) -> &dyn Sketch {
        match self {
            AnySketch::Cms(s) => s,
            AnySketch::Cml(s) => s,
            AnySketch::Cmts(s) => s,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Sketch {
        match self {
            AnySketch::Cms(s) => s,
            AnySketch::Cml(s) => s,
            AnySketch::Cmts(s) => s,
        }
    }

    /// Estimate rendered the way the variant counts: integers for linear
    /// and tree sketches, reals for logarithmic ones.
    pub fn format_estimate(&self, key: &Key) -> String {
        let value = self.estimate(key);
        match self {
            AnySketch::Cml(_) => format!("{value}"),
            _ => format!("{}", value as u64),
        }
    }

    /// Serializes into the `CMSK` binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        crate::codec::encode(self)
    }

    /// Parses the `CMSK` binary format.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        crate::codec::decode(bytes)
    }

    /// Merges two sketches of identical configuration. Only tree sketches
    /// support merging.
    pub fn merge(&self, other: &AnySketch) -> Result<AnySketch> {
        match (self, other) {
            (AnySketch::Cmts(a), AnySketch::Cmts(b)) => Ok(AnySketch::Cmts(a.merge(b)?)),
            (AnySketch::Cmts(_), _) | (_, AnySketch::Cmts(_)) => {
                Err(Error::IncompatibleSketches("variants differ".to_string()))
            }
            _ => Err(Error::invalid("merge is only defined for tree sketches")),
        }
    }
}

impl Sketch for AnySketch {
    fn config(&self) -> &SketchConfig {
        self.inner().config()
    }

    fn estimate(&self, key: &Key) -> f64 {
        self.inner().estimate(key)
    }

    fn update(&mut self, key: &Key, count: u64) {
        self.inner_mut().update(key, count)
    }

    fn memory_bytes(&self) -> usize {
        self.inner().memory_bytes()
    }
}

impl From<CmsSketch> for AnySketch {
    fn from(s: CmsSketch) -> Self {
        AnySketch::Cms(s)
    }
}

impl From<CmlSketch> for AnySketch {
    fn from(s: CmlSketch) -> Self {
        AnySketch::Cml(s)
    }
}

impl From<CmtsSketch> for AnySketch {
    fn from(s: CmtsSketch) -> Self {
        AnySketch::Cmts(s)
    }
}
