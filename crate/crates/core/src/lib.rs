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

//! Approximate event counting with count-min sketches under conservative
//! update, tuned for the heavily skewed count distributions found in text.
//!
//! Three sketch families share one hashing scheme and one binary format:
//!
//! - [`cms::CmsSketch`]: the classical linear sketch with 32-bit cells.
//! - [`cml::CmlSketch`]: count-min-log, whose cells are Morris-style
//!   logarithmic counters storing an exponent.
//! - [`cmts::CmtsSketch`]: the count-min tree sketch. Counters are grouped
//!   in blocks where low-order counting bits are private and high-order
//!   counting bits are shared between neighbours, gated by barrier bits
//!   that never clear. A spire on top of each block holds the remaining
//!   high bits.
//!
//! The [`corpus`] module produces token streams (text files or synthetic
//! Zipfian draws) together with exact counts, and [`eval`] measures the
//! error of every sketch family against those counts across a grid of
//! memory budgets.
//!
//! ```
//! use tree_sketch::{AnySketch, CmtsLayout, Sketch, SketchConfig, VariantParams};
//!
//! let config = SketchConfig::new(4, 1024, 7, VariantParams::Cmts(CmtsLayout::default())).unwrap();
//! let mut sketch = AnySketch::new(config);
//! for _ in 0..13 {
//!     sketch.update(b"cat", 1);
//! }
//! assert_eq!(sketch.estimate(b"cat"), 13.0);
//! assert_eq!(sketch.estimate(b"dog"), 0.0);
//! ```
//!
//! A sketch has a single writer. Sketches are `Send`, so independent
//! instances can be filled on different threads and, for the tree sketch,
//! merged afterwards.

pub mod cml;
pub mod cms;
pub mod cmts;
mod codec;
pub mod corpus;
mod error;
pub mod eval;
mod hash;
mod sketch;

pub use codec::{FORMAT_VERSION, MAGIC};
pub use error::{Error, Result};
pub use hash::{hash_bytes, row_seed};
pub use sketch::{
    bigram_key, AnySketch, Key, RowIndex, Sketch, SketchConfig, VariantParams, VariantTag,
    BIGRAM_SEPARATOR,
};

pub use cml::{CmlParams, CmlSketch};
pub use cms::CmsSketch;
pub use cmts::{CmtsLayout, CmtsSketch};
