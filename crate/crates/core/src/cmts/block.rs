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

//! Value decoding and encoding on the packed bits of one block.
//!
//! A counter with `b` contiguous barrier bits set (counted from level 0)
//! reads `b + 1` counting bits, or every counting layer plus the spire when
//! `b` equals the number of levels. Its value is the counting bits read as
//! an integer `c`, layer 0 least significant, plus `2 * (2^b - 1)`: the
//! barriers alone account for that offset.

use super::layout::{CmtsLayout, Geometry};

#[inline]
fn get_bit(words: &[u64], pos: u32) -> u64 {
    (words[(pos >> 6) as usize] >> (pos & 63)) & 1
}

#[inline]
fn put_bit(words: &mut [u64], pos: u32, bit: u64) {
    let w = &mut words[(pos >> 6) as usize];
    let mask = 1u64 << (pos & 63);
    if bit != 0 {
        *w |= mask;
    } else {
        *w &= !mask;
    }
}

#[inline]
fn read_bits(words: &[u64], pos: u32, len: u32) -> u64 {
    debug_assert!(len <= 64);
    let mut out = 0u64;
    let mut done = 0;
    while done < len {
        let p = pos + done;
        let shift = p & 63;
        let take = (64 - shift).min(len - done);
        let chunk = (words[(p >> 6) as usize] >> shift) & low_mask(take);
        out |= chunk << done;
        done += take;
    }
    out
}

#[inline]
fn write_bits(words: &mut [u64], pos: u32, len: u32, value: u64) {
    let mut done = 0;
    while done < len {
        let p = pos + done;
        let shift = p & 63;
        let take = (64 - shift).min(len - done);
        let mask = low_mask(take) << shift;
        let w = &mut words[(p >> 6) as usize];
        *w = (*w & !mask) | (((value >> done) << shift) & mask);
        done += take;
    }
}

#[inline]
fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Bit length of `x`; zero for zero.
#[inline]
pub(crate) fn bit_length(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// Barrier count a value is encoded with: `min(levels, bit_length((v + 2) / 4))`.
#[inline]
pub(crate) fn barriers_for(levels: u32, value: u64) -> u32 {
    levels.min(bit_length((value + 2) / 4))
}

/// Value contributed by `b` set barriers.
#[inline]
pub(crate) fn barrier_offset(b: u32) -> u64 {
    2 * ((1u64 << b) - 1)
}

impl Geometry {
    /// Number of contiguous set barrier bits for counter `offset`.
    #[inline]
    pub fn barrier_count(&self, block: &[u64], offset: u32) -> u32 {
        let mut b = 0;
        while b < self.levels && get_bit(block, self.barrier_pos(b, offset)) == 1 {
            b += 1;
        }
        b
    }

    #[inline]
    pub fn decode(&self, block: &[u64], offset: u32) -> u64 {
        let b = self.barrier_count(block, offset);
        let layers = if b < self.levels { b + 1 } else { self.levels };
        let mut c = 0u64;
        for k in 0..layers {
            c |= get_bit(block, self.counting_pos(k, offset)) << k;
        }
        if b == self.levels {
            c |= read_bits(block, self.spire_off, self.spire_bits) << self.levels;
        }
        c + barrier_offset(b)
    }

    /// Writes `value` for counter `offset`: barriers are OR-ed in, counting
    /// bits (and the spire at full barrier count) are overwritten.
    #[inline]
    pub fn encode(&self, block: &mut [u64], offset: u32, value: u64) {
        debug_assert!(value <= self.max_value);
        let nb = barriers_for(self.levels, value);
        let nc = value - barrier_offset(nb);
        for l in 0..nb {
            put_bit(block, self.barrier_pos(l, offset), 1);
        }
        let layers = if nb < self.levels {
            nb + 1
        } else {
            self.levels
        };
        for k in 0..layers {
            put_bit(block, self.counting_pos(k, offset), (nc >> k) & 1);
        }
        if nb == self.levels {
            write_bits(block, self.spire_off, self.spire_bits, nc >> self.levels);
        }
    }
}

/// One standalone block of counters, for inspecting and driving the packed
/// representation directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmtsBlock {
    geom: Geometry,
    words: Vec<u64>,
}

impl CmtsBlock {
    pub fn new(layout: CmtsLayout) -> Self {
        let geom = Geometry::new(layout);
        let words = vec![0; geom.words];
        CmtsBlock { geom, words }
    }

    pub fn layout(&self) -> &CmtsLayout {
        &self.geom.layout
    }

    /// Decoded value of counter `offset`.
    ///
    /// # Panics
    ///
    /// Panics if `offset` is not below the base width.
    pub fn decode(&self, offset: u32) -> u64 {
        self.check(offset);
        self.geom.decode(&self.words, offset)
    }

    /// Encodes `value`, clamped to the layout maximum, into counter `offset`.
    pub fn encode(&mut self, offset: u32, value: u64) {
        self.check(offset);
        self.geom
            .encode(&mut self.words, offset, value.min(self.geom.max_value));
    }

    /// Contiguous barrier count seen by counter `offset`.
    pub fn barrier_count(&self, offset: u32) -> u32 {
        self.check(offset);
        self.geom.barrier_count(&self.words, offset)
    }

    /// Bit `node` of counting layer `layer`.
    pub fn counting_bit(&self, layer: u8, node: u32) -> bool {
        assert!(node < self.geom.layout.counting_width(layer));
        get_bit(&self.words, self.geom.counting_off[layer as usize] + node) == 1
    }

    pub fn set_counting_bit(&mut self, layer: u8, node: u32, bit: bool) {
        assert!(node < self.geom.layout.counting_width(layer));
        put_bit(
            &mut self.words,
            self.geom.counting_off[layer as usize] + node,
            u64::from(bit),
        );
    }

    /// Bit `node` of barrier level `level`.
    pub fn barrier_bit(&self, level: u8, node: u32) -> bool {
        assert!(node < self.geom.layout.barrier_width(level));
        get_bit(&self.words, self.geom.barrier_off[level as usize] + node) == 1
    }

    /// Sets a barrier bit. Barriers cannot be cleared.
    pub fn set_barrier_bit(&mut self, level: u8, node: u32) {
        assert!(node < self.geom.layout.barrier_width(level));
        put_bit(
            &mut self.words,
            self.geom.barrier_off[level as usize] + node,
            1,
        );
    }

    pub fn spire(&self) -> u64 {
        read_bits(&self.words, self.geom.spire_off, self.geom.spire_bits)
    }

    pub fn set_spire(&mut self, value: u64) {
        assert!(value <= low_mask(self.geom.spire_bits));
        write_bits(
            &mut self.words,
            self.geom.spire_off,
            self.geom.spire_bits,
            value,
        );
    }

    fn check(&self, offset: u32) {
        assert!(
            offset < self.geom.layout.base_width(),
            "offset {offset} out of range for base width {}",
            self.geom.layout.base_width()
        );
    }
}
