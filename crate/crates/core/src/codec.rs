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

//! The `CMSK` binary sketch format.
//!
//! All integers are little-endian.
//!
//! | field        | size | notes                                   |
//! |--------------|------|-----------------------------------------|
//! | magic        | 4    | `CMSK`                                  |
//! | version      | 2    | [`FORMAT_VERSION`]                      |
//! | variant tag  | 1    | 0x01 linear, 0x02 log, 0x03 tree        |
//! | depth        | 4    |                                         |
//! | width        | 4    |                                         |
//! | seed         | 8    |                                         |
//! | params       | var  | per variant, see below                  |
//! | cells        | var  | row-major                               |
//!
//! Linear sketches have no params and 4-byte cells. Log sketches store the
//! base (`f64`), the cell width in bits (`u8`), and the random stream
//! position (32-byte seed, `u64` stream, `u128` word position), followed by
//! 1- or 2-byte cells. Tree sketches store the base width (`u32`), levels
//! (`u8`), spire bits (`u8`) and merge policy (`u8`); each block then takes
//! `ceil(bits / 8)` bytes with counting layers from layer 0 up, then barrier
//! levels, then the spire.

use crate::cml::{Cells, CmlParams, CmlSketch, RngState};
use crate::cms::CmsSketch;
use crate::cmts::{CmtsLayout, CmtsSketch, MergePolicy};
use crate::error::{Error, Result};
use crate::sketch::{AnySketch, SketchConfig, VariantParams, VariantTag};

pub const MAGIC: [u8; 4] = *b"CMSK";
pub const FORMAT_VERSION: u16 = 1;

const COMMON_HEADER: usize = 4 + 2 + 1 + 4 + 4 + 8;

pub(crate) fn header_len(config: &SketchConfig) -> usize {
    COMMON_HEADER
        + match config.params() {
            VariantParams::Cms => 0,
            VariantParams::Cml(_) => 8 + 1 + 32 + 8 + 16,
            VariantParams::Cmts(_) => 4 + 1 + 1 + 1,
        }
}

pub(crate) fn encode(sketch: &AnySketch) -> Vec<u8> {
    let config = *crate::Sketch::config(sketch);
    let mut out = Vec::with_capacity(header_len(&config) + crate::Sketch::memory_bytes(sketch));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(config.params().tag() as u8);
    out.extend_from_slice(&config.depth().to_le_bytes());
    out.extend_from_slice(&config.width().to_le_bytes());
    out.extend_from_slice(&config.seed().to_le_bytes());
    match sketch {
        AnySketch::Cms(s) => {
            for c in s.cells() {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        AnySketch::Cml(s) => {
            let p = s.params();
            out.extend_from_slice(&p.base().to_le_bytes());
            out.push(p.cell_bits());
            let rng = s.rng_state();
            out.extend_from_slice(&rng.seed);
            out.extend_from_slice(&rng.stream.to_le_bytes());
            out.extend_from_slice(&rng.word_pos.to_le_bytes());
            match s.cells_ref() {
                Cells::Narrow(v) => out.extend_from_slice(v),
                Cells::Wide(v) => {
                    for c in v {
                        out.extend_from_slice(&c.to_le_bytes());
                    }
                }
            }
        }
        AnySketch::Cmts(s) => {
            let layout = s.layout();
            out.extend_from_slice(&layout.base_width().to_le_bytes());
            out.push(layout.levels());
            out.push(layout.spire_bits());
            out.push(s.merge_policy() as u8);
            let block_bytes = layout.bytes_per_block();
            for b in 0..s.block_count() {
                let mut bytes = Vec::with_capacity(s.words_per_block() * 8);
                for w in s.block_words(b) {
                    bytes.extend_from_slice(&w.to_le_bytes());
                }
                out.extend_from_slice(&bytes[..block_bytes]);
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated {
            needed: usize::MAX,
            found: self.bytes.len(),
        })?;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                needed: end,
                found: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn finish(&self) -> Result<()> {
        match self.bytes.len() - self.pos {
            0 => Ok(()),
            extra => Err(Error::TrailingBytes(extra)),
        }
    }
}

fn cell_bytes(config: &SketchConfig, per_cell: usize) -> Result<usize> {
    config
        .cells()
        .checked_mul(per_cell)
        .ok_or_else(|| Error::invalid("sketch dimensions overflow"))
}

pub(crate) fn decode(bytes: &[u8]) -> Result<AnySketch> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    r.take(4)?;
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnknownVersion(version));
    }
    let tag = VariantTag::try_from(r.u8()?)?;
    let depth = r.u32()?;
    let width = r.u32()?;
    let seed = r.u64()?;
    let sketch = match tag {
        VariantTag::Cms => {
            let config = SketchConfig::new(depth, width, seed, VariantParams::Cms)?;
            let raw = r.take(cell_bytes(&config, 4)?)?;
            let cells = raw
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            AnySketch::Cms(CmsSketch::from_cells(config, cells))
        }
        VariantTag::Cml => {
            let base = r.f64()?;
            let bits = r.u8()?;
            let params = CmlParams::new(base, bits)?;
            let rng = RngState {
                seed: r.array()?,
                stream: r.u64()?,
                word_pos: r.u128()?,
            };
            let config = SketchConfig::new(depth, width, seed, VariantParams::Cml(params))?;
            let raw = r.take(cell_bytes(&config, usize::from(bits / 8))?)?;
            let cells = if bits == 8 {
                Cells::Narrow(raw.to_vec())
            } else {
                Cells::Wide(
                    raw.chunks_exact(2)
                        .map(|c| u16::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                )
            };
            AnySketch::Cml(CmlSketch::from_parts(config, cells, rng))
        }
        VariantTag::Cmts => {
            let base_width = r.u32()?;
            let levels = r.u8()?;
            let spire = r.u8()?;
            let policy = r.u8()?;
            if policy != MergePolicy::Ascending as u8 {
                return Err(Error::invalid(format!("unknown merge policy {policy}")));
            }
            let layout = CmtsLayout::new(base_width, levels, spire)?;
            let config = SketchConfig::new(depth, width, seed, VariantParams::Cmts(layout))?;
            let mut sketch = CmtsSketch::new(config);
            let block_bytes = layout.bytes_per_block();
            let mut buf = vec![0u8; sketch.words_per_block() * 8];
            for b in 0..sketch.block_count() {
                buf[..block_bytes].copy_from_slice(r.take(block_bytes)?);
                for (w, chunk) in sketch
                    .block_words_mut(b)
                    .iter_mut()
                    .zip(buf.chunks_exact(8))
                {
                    *w = u64::from_le_bytes(chunk.try_into().unwrap());
                }
            }
            AnySketch::Cmts(sketch)
        }
    };
    r.finish()?;
    Ok(sketch)
}
