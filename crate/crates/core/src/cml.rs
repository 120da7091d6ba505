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

//! Count-min-log sketch with conservative update.
//!
//! Each cell stores the exponent `c` of a Morris-style counter. An increment
//! fires with probability `base^-c`, and an exponent decodes to the partial
//! geometric sum `(base^c - 1) / (base - 1)`, which makes the decoded value
//! an unbiased estimate of the number of increments. Under conservative
//! update one uniform draw is taken per increment and only the rows sitting
//! at the minimum exponent advance.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hash::splitmix64;
use crate::sketch::{Key, Sketch, SketchConfig, VariantParams};

const RNG_DOMAIN: u64 = 0x636D_6C5F_726E_6721;

/// Logarithm base and cell width of a count-min-log sketch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmlParams {
    base: f64,
    cell_bits: u8,
}

impl CmlParams {
    /// 16-bit cells, base 1.00025.
    pub const CMLS16: CmlParams = CmlParams {
        base: 1.00025,
        cell_bits: 16,
    };
    /// 8-bit cells, base 1.08.
    pub const CMLS8: CmlParams = CmlParams {
        base: 1.08,
        cell_bits: 8,
    };

    pub fn new(base: f64, cell_bits: u8) -> Result<Self> {
        let p = CmlParams { base, cell_bits };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.base.is_finite() && self.base > 1.0) {
            return Err(Error::invalid(format!(
                "log base must be > 1, got {}",
                self.base
            )));
        }
        if self.cell_bits != 8 && self.cell_bits != 16 {
            return Err(Error::invalid(format!(
                "cell width must be 8 or 16 bits, got {}",
                self.cell_bits
            )));
        }
        Ok(())
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn cell_bits(&self) -> u8 {
        self.cell_bits
    }

    pub fn max_exponent(&self) -> u32 {
        (1u32 << self.cell_bits) - 1
    }

    /// Decoded value of exponent `c`.
    pub fn point_value(&self, c: u32) -> f64 {
        match c {
            0 => 0.0,
            1 => 1.0,
            _ => (self.base.powi(c as i32) - 1.0) / (self.base - 1.0),
        }
    }

    /// Probability that an increment fires at exponent `c`.
    pub fn fire_probability(&self, c: u32) -> f64 {
        self.base.powi(-(c as i32))
    }
}

#[derive(Debug)]
struct Tables {
    value: Vec<f64>,
    fire: Vec<f64>,
}

impl Tables {
    fn new(params: &CmlParams) -> Self {
        let n = params.max_exponent() + 1;
        Tables {
            value: (0..n).map(|c| params.point_value(c)).collect(),
            fire: (0..n).map(|c| params.fire_probability(c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Cells {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

impl Cells {
    fn zeroed(bits: u8, len: usize) -> Self {
        if bits == 8 {
            Cells::Narrow(vec![0; len])
        } else {
            Cells::Wide(vec![0; len])
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> u32 {
        match self {
            Cells::Narrow(v) => u32::from(v[i]),
            Cells::Wide(v) => u32::from(v[i]),
        }
    }

    #[inline]
    fn bump(&mut self, i: usize) {
        match self {
            Cells::Narrow(v) => v[i] += 1,
            Cells::Wide(v) => v[i] += 1,
        }
    }

    #[cfg(test)]
    fn set(&mut self, i: usize, c: u32) {
        match self {
            Cells::Narrow(v) => v[i] = c as u8,
            Cells::Wide(v) => v[i] = c as u16,
        }
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Cells::Narrow(v) => v.len(),
            Cells::Wide(v) => v.len(),
        }
    }
}

/// Serializable position of the sketch's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

/// Depth × width matrix of logarithmic counters.
#[derive(Debug, Clone)]
pub struct CmlSketch {
    config: SketchConfig,
    params: CmlParams,
    cells: Cells,
    rng: ChaCha8Rng,
    tables: Arc<Tables>,
}

impl PartialEq for CmlSketch {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.cells == other.cells && self.rng == other.rng
    }
}

impl CmlSketch {
    /// # Panics
    ///
    /// Panics if `config` is not a count-min-log config.
    pub fn new(config: SketchConfig) -> Self {
        let VariantParams::Cml(params) = *config.params() else {
            panic!("not a count-min-log config");
        };
        CmlSketch {
            config,
            params,
            cells: Cells::zeroed(params.cell_bits, config.cells()),
            rng: ChaCha8Rng::seed_from_u64(splitmix64(config.seed() ^ RNG_DOMAIN)),
            tables: Arc::new(Tables::new(&params)),
        }
    }

    pub(crate) fn from_parts(config: SketchConfig, cells: Cells, rng: RngState) -> Self {
        let mut sketch = CmlSketch::new(config);
        debug_assert_eq!(cells.len(), config.cells());
        sketch.cells = cells;
        let mut r = ChaCha8Rng::from_seed(rng.seed);
        r.set_stream(rng.stream);
        r.set_word_pos(rng.word_pos);
        sketch.rng = r;
        sketch
    }

    pub(crate) fn cells_ref(&self) -> &Cells {
        &self.cells
    }

    pub(crate) fn rng_state(&self) -> RngState {
        RngState {
            seed: self.rng.get_seed(),
            stream: self.rng.get_stream(),
            word_pos: self.rng.get_word_pos(),
        }
    }

    pub fn params(&self) -> &CmlParams {
        &self.params
    }

    /// Exponent of `key` in each row.
    pub fn exponents(&self, key: &Key) -> Vec<u32> {
        let mut idx = vec![0; self.config.depth() as usize];
        self.config.flat_cells(key, &mut idx);
        idx.iter().map(|&i| self.cells.get(i)).collect()
    }

    /// Decoded value of the minimum exponent over rows.
    pub fn point(&self, key: &Key) -> f64 {
        let min = self.exponents_min(key);
        self.tables.value[min as usize]
    }

    fn exponents_min(&self, key: &Key) -> u32 {
        let d = self.config.depth() as usize;
        let mut buf = [0usize; 8];
        if d <= buf.len() {
            self.config.flat_cells(key, &mut buf[..d]);
            buf[..d]
                .iter()
                .map(|&i| self.cells.get(i))
                .min()
                .unwrap_or(0)
        } else {
            self.exponents(key).into_iter().min().unwrap_or(0)
        }
    }

    /// One conservative probabilistic increment.
    pub fn increment(&mut self, key: &Key) {
        let u: f64 = self.rng.random();
        self.increment_with_draw(key, u);
    }

    fn increment_with_draw(&mut self, key: &Key, u: f64) {
        let d = self.config.depth() as usize;
        let mut buf = [0usize; 8];
        let mut heap;
        let idx: &mut [usize] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            heap = vec![0; d];
            &mut heap
        };
        self.config.flat_cells(key, idx);
        let min = idx.iter().map(|&i| self.cells.get(i)).min().unwrap_or(0);
        if min >= self.params.max_exponent() || u >= self.tables.fire[min as usize] {
            return;
        }
        for &i in idx.iter() {
            // Rows sharing a cell see the bump once.
            if self.cells.get(i) == min {
                self.cells.bump(i);
            }
        }
    }
}

impl Sketch for CmlSketch {
    fn config(&self) -> &SketchConfig {
        &self.config
    }

    fn estimate(&self, key: &Key) -> f64 {
        self.point(key)
    }

    fn update(&mut self, key: &Key, count: u64) {
        for _ in 0..count {
            self.increment(key);
        }
    }

    fn memory_bytes(&self) -> usize {
        self.cells.len() * usize::from(self.params.cell_bits / 8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch(depth: u32, width: u32, params: CmlParams, seed: u64) -> CmlSketch {
        CmlSketch::new(SketchConfig::new(depth, width, seed, VariantParams::Cml(params)).unwrap())
    }

    #[test]
    fn point_values() {
        let p = CmlParams::CMLS8;
        assert_eq!(p.point_value(0), 0.0);
        assert_eq!(p.point_value(1), 1.0);
        assert!((p.point_value(2) - 2.08).abs() < 1e-12);
        // The geometric-sum closed form agrees with explicit summation.
        let sum: f64 = (0..10).map(|k| 1.08f64.powi(k)).sum();
        assert!((p.point_value(10) - sum).abs() < 1e-9);
    }

    #[test]
    fn params_validation() {
        assert!(CmlParams::new(1.0, 8).is_err());
        assert!(CmlParams::new(0.5, 8).is_err());
        assert!(CmlParams::new(1.1, 12).is_err());
        assert!(CmlParams::new(1.1, 16).is_ok());
    }

    #[test]
    fn first_increment_always_fires() {
        let mut s = sketch(3, 64, CmlParams::CMLS8, 1);
        s.increment_with_draw(b"k", 0.999_999);
        assert_eq!(s.exponents(b"k"), vec![1, 1, 1]);
        assert_eq!(s.point(b"k"), 1.0);
    }

    fn distinct_row_key(s: &CmlSketch) -> Vec<u8> {
        (0u32..)
            .map(|i| i.to_le_bytes().to_vec())
            .find(|k| {
                let mut idx = vec![0; s.config.depth() as usize];
                s.config.flat_cells(k, &mut idx);
                idx.windows(2).all(|w| w[0] != w[1])
            })
            .unwrap()
    }

    fn set_exponents(s: &mut CmlSketch, key: &Key, values: &[u32]) {
        let mut idx = vec![0; s.config.depth() as usize];
        s.config.flat_cells(key, &mut idx);
        for (i, v) in idx.into_iter().zip(values) {
            s.cells.set(i, *v);
        }
    }

    #[test]
    fn only_minimum_rows_advance() {
        // 1.08^-3 = 0.7938..., so a draw of 0.5 fires.
        assert!((1.08f64.powi(-3) - 0.793_832).abs() < 1e-6);
        let mut s = sketch(2, 64, CmlParams::CMLS8, 1);
        let key = distinct_row_key(&s);
        set_exponents(&mut s, &key, &[3, 5]);
        s.increment_with_draw(&key, 0.5);
        assert_eq!(s.exponents(&key), vec![4, 5]);
        // A draw above the fire probability leaves everything alone.
        s.increment_with_draw(&key, 0.9);
        assert_eq!(s.exponents(&key), vec![4, 5]);
    }

    #[test]
    fn min_rule_on_point() {
        let mut s = sketch(2, 64, CmlParams::CMLS8, 1);
        let key = distinct_row_key(&s);
        set_exponents(&mut s, &key, &[2, 4]);
        assert!((s.point(&key) - 2.08).abs() < 1e-12);
    }

    #[test]
    fn exponents_saturate() {
        let mut s = sketch(1, 1, CmlParams::CMLS8, 1);
        set_exponents(&mut s, b"k", &[255]);
        s.increment_with_draw(b"k", 0.0);
        assert_eq!(s.exponents(b"k"), vec![255]);
    }

    #[test]
    fn same_seed_same_exponents() {
        let mut a = sketch(4, 32, CmlParams::CMLS8, 77);
        let mut b = sketch(4, 32, CmlParams::CMLS8, 77);
        for i in 0..5000u32 {
            let key = (i % 300).to_le_bytes();
            a.increment(&key);
            b.increment(&key);
        }
        assert_eq!(a, b);
        let mut c = sketch(4, 32, CmlParams::CMLS8, 78);
        for i in 0..5000u32 {
            c.increment(&(i % 300).to_le_bytes());
        }
        assert_ne!(a.cells, c.cells);
    }

    fn single_key_runs(params: CmlParams, n: u64, runs: u64) -> Vec<f64> {
        (0..runs)
            .map(|seed| {
                let mut s = sketch(1, 1, params, seed);
                s.update(b"k", n);
                s.point(b"k")
            })
            .collect()
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn decoded_value_is_unbiased() {
        for params in [CmlParams::CMLS8, CmlParams::CMLS16] {
            for n in [100u64, 10_000] {
                let xs = single_key_runs(params, n, 100);
                let (mean, se) = mean_and_se(&xs);
                assert!(
                    (mean - n as f64).abs() <= 3.0 * se.max(1e-9),
                    "base {} n {n}: mean {mean} se {se}",
                    params.base()
                );
            }
        }
    }

    #[test]
    fn morris_counter_tracks_large_counts() {
        let xs = single_key_runs(CmlParams::CMLS8, 100_000, 20);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1e5).abs() <= 0.15 * 1e5, "mean {mean}");
    }

    #[test]
    fn residual_error_persists_without_collisions() {
        // 10^4 keys of count 1000 in a sketch far wider than the key set: the
        // relative error comes from the stochastic counters, not collisions.
        let mut s = sketch(4, 1 << 22, CmlParams::CMLS8, 5);
        let keys: Vec<[u8; 4]> = (0..10_000u32).map(|k| k.to_le_bytes()).collect();
        for _ in 0..1000 {
            for k in &keys {
                s.increment(k);
            }
        }
        let are = keys
            .iter()
            .map(|k| (s.point(k) - 1000.0).abs() / 1000.0)
            .sum::<f64>()
            / keys.len() as f64;
        assert!(are > 0.01, "ARE {are}");
    }
}
