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

use crate::error::{Error, Result};

/// Maximum number of barrier levels a layout may have.
pub const MAX_LEVELS: u8 = 32;

/// Shape of one tree-sketch block.
///
/// A block holds `base_width` counters. Counting layer `l` has
/// `base_width >> l` bits, so counter `i` owns bit `i >> l` of that layer and
/// shares it with the other counters of its aligned group of `2^l`. Barrier
/// level `l` has `max(base_width >> (l + 1), 1)` bits; its bit for counter `i`
/// gates access to counting layer `l + 1`, and the top level gates the spire
/// of `spire_bits` bits shared by the whole block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CmtsLayout {
    base_width: u32,
    levels: u8,
    spire_bits: u8,
}

impl Default for CmtsLayout {
    /// 128 counters per block, full depth (8 levels), 32-bit spire.
    fn default() -> Self {
        CmtsLayout {
            base_width: 128,
            levels: 8,
            spire_bits: 32,
        }
    }
}

impl CmtsLayout {
    pub fn new(base_width: u32, levels: u8, spire_bits: u8) -> Result<Self> {
        let layout = CmtsLayout {
            base_width,
            levels,
            spire_bits,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Layout whose top counting layer is a single bit: `levels = log2(W) + 1`.
    pub fn full_depth(base_width: u32, spire_bits: u8) -> Result<Self> {
        if !base_width.is_power_of_two() {
            return Err(Error::invalid(format!(
                "block base width {base_width} is not a power of two"
            )));
        }
        Self::new(
            base_width,
            base_width.trailing_zeros() as u8 + 1,
            spire_bits,
        )
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.base_width.is_power_of_two() {
            return Err(Error::invalid(format!(
                "block base width {} is not a power of two",
                self.base_width
            )));
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::invalid(format!(
                "levels must be in 1..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        if u64::from(self.base_width) < 1u64 << (self.levels - 1) {
            return Err(Error::invalid(format!(
                "{} levels need a base width of at least {}",
                self.levels,
                1u64 << (self.levels - 1)
            )));
        }
        if self.spire_bits == 0 {
            return Err(Error::invalid("spire must have at least one bit"));
        }
        if u32::from(self.levels) + u32::from(self.spire_bits) > 62 {
            return Err(Error::invalid(format!(
                "levels + spire bits must not exceed 62, got {}",
                u32::from(self.levels) + u32::from(self.spire_bits)
            )));
        }
        Ok(())
    }

    pub fn base_width(&self) -> u32 {
        self.base_width
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn spire_bits(&self) -> u8 {
        self.spire_bits
    }

    pub fn counting_width(&self, layer: u8) -> u32 {
        self.base_width >> layer
    }

    pub fn barrier_width(&self, level: u8) -> u32 {
        (self.base_width >> (level + 1)).max(1)
    }

    /// Bits in one block: all counting layers, all barrier levels and the spire.
    pub fn bits_per_block(&self) -> u32 {
        let counting: u32 = (0..self.levels).map(|l| self.counting_width(l)).sum();
        let barriers: u32 = (0..self.levels).map(|l| self.barrier_width(l)).sum();
        counting + barriers + u32::from(self.spire_bits)
    }

    /// Bytes one block occupies in storage.
    pub fn bytes_per_block(&self) -> usize {
        self.bits_per_block().div_ceil(8) as usize
    }

    /// Largest value a counter can hold: every barrier set and every counting
    /// bit, spire included, at one.
    pub fn max_value(&self) -> u64 {
        let l = u32::from(self.levels);
        2 * ((1u64 << l) - 1) + (1u64 << (l + u32::from(self.spire_bits))) - 1
    }
}

/// Precomputed bit offsets of a layout inside a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Geometry {
    pub layout: CmtsLayout,
    pub levels: u32,
    pub spire_bits: u32,
    pub counting_off: [u32; MAX_LEVELS as usize],
    pub barrier_off: [u32; MAX_LEVELS as usize],
    pub barrier_last: [u32; MAX_LEVELS as usize],
    pub spire_off: u32,
    pub words: usize,
    pub max_value: u64,
}

impl Geometry {
    pub fn new(layout: CmtsLayout) -> Self {
        let mut counting_off = [0; MAX_LEVELS as usize];
        let mut barrier_off = [0; MAX_LEVELS as usize];
        let mut barrier_last = [0; MAX_LEVELS as usize];
        let mut pos = 0;
        for l in 0..layout.levels {
            counting_off[l as usize] = pos;
            pos += layout.counting_width(l);
        }
        for l in 0..layout.levels {
            barrier_off[l as usize] = pos;
            barrier_last[l as usize] = layout.barrier_width(l) - 1;
            pos += layout.barrier_width(l);
        }
        let spire_off = pos;
        pos += u32::from(layout.spire_bits);
        debug_assert_eq!(pos, layout.bits_per_block());
        Geometry {
            layout,
            levels: u32::from(layout.levels),
            spire_bits: u32::from(layout.spire_bits),
            counting_off,
            barrier_off,
            barrier_last,
            spire_off,
            words: pos.div_ceil(64) as usize,
            max_value: layout.max_value(),
        }
    }

    #[inline]
    pub fn barrier_pos(&self, level: u32, offset: u32) -> u32 {
        let l = level as usize;
        self.barrier_off[l] + (offset >> (level + 1)).min(self.barrier_last[l])
    }

    #[inline]
    pub fn counting_pos(&self, layer: u32, offset: u32) -> u32 {
        self.counting_off[layer as usize] + (offset >> layer)
    }

    /// Mask over a block's words selecting every barrier bit.
    pub fn barrier_mask(&self) -> Vec<u64> {
        let mut mask = vec![0u64; self.words];
        for pos in self.barrier_off[0]..self.spire_off {
            mask[(pos >> 6) as usize] |= 1 << (pos & 63);
        }
        mask
    }
}
