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

//! Seeded 64-bit hashing of key bytes.
//!
//! The hash is a word-at-a-time multiply/xor-shift over little-endian 8-byte
//! chunks followed by a SplitMix64 finalizer, so its output is identical on
//! every platform. Each sketch row gets its own seed derived from the sketch
//! seed and the row index.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MUL: u64 = 0xFF51_AFD7_ED55_8CCD;

#[inline]
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    let h = (h ^ word).wrapping_mul(MUL);
    h ^ (h >> 32)
}

/// Hashes `bytes` under `seed`.
#[inline]
pub fn hash_bytes(bytes: &[u8], seed: u64) -> u64 {
    let mut h = seed ^ (bytes.len() as u64).wrapping_mul(GOLDEN);
    let mut chunks = bytes.chunks_exact(8);
    for chunk in &mut chunks {
        h = absorb(h, u64::from_le_bytes(chunk.try_into().unwrap()));
    }
    let rem = chunks.remainder();
    if !rem.is_empty() {
        let mut tail = [0u8; 8];
        tail[..rem.len()].copy_from_slice(rem);
        h = absorb(h, u64::from_le_bytes(tail));
    }
    splitmix64(h)
}

/// Seed used by row `row` of a sketch seeded with `seed`.
#[inline]
pub fn row_seed(seed: u64, row: u32) -> u64 {
    splitmix64(seed ^ splitmix64(u64::from(row).wrapping_add(1).wrapping_mul(GOLDEN)))
}
