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

//! Linear count-min sketch with conservative update and 32-bit cells.

use crate::sketch::{Key, Sketch, SketchConfig, VariantParams};

/// Depth × width matrix of saturating `u32` counters.
#[derive(Debug, Clone, PartialEq)]
pub struct CmsSketch {
    config: SketchConfig,
    cells: Vec<u32>,
}

impl CmsSketch {
    /// # Panics
    ///
    /// Panics if `config` is not a linear sketch config.
    pub fn new(config: SketchConfig) -> Self {
        assert!(matches!(config.params(), VariantParams::Cms));
        CmsSketch {
            config,
            cells: vec![0; config.cells()],
        }
    }

    pub(crate) fn from_cells(config: SketchConfig, cells: Vec<u32>) -> Self {
        debug_assert_eq!(cells.len(), config.cells());
        CmsSketch { config, cells }
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// The value of `key` in each row.
    pub fn row_values(&self, key: &Key) -> Vec<u32> {
        let mut idx = vec![0; self.config.depth() as usize];
        self.config.flat_cells(key, &mut idx);
        idx.iter().map(|&i| self.cells[i]).collect()
    }

    /// Minimum over rows of the key's cells.
    pub fn point(&self, key: &Key) -> u32 {
        let mut idx = [0usize; 8];
        let d = self.config.depth() as usize;
        if d <= idx.len() {
            self.config.flat_cells(key, &mut idx[..d]);
            return idx[..d].iter().map(|&i| self.cells[i]).min().unwrap_or(0);
        }
        let mut idx = vec![0; d];
        self.config.flat_cells(key, &mut idx);
        idx.iter().map(|&i| self.cells[i]).min().unwrap_or(0)
    }

    /// Conservative increment by one.
    pub fn increment(&mut self, key: &Key) {
        self.add(key, 1);
    }

    /// `count` conservative increments: every cell of `key` becomes
    /// `max(cell, m + count)` where `m` is the current minimum. This equals
    /// `count` repeated single increments.
    pub fn add(&mut self, key: &Key, count: u64) {
        let mut buf = [0usize; 8];
        let d = self.config.depth() as usize;
        let mut heap;
        let idx: &mut [usize] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            heap = vec![0; d];
            &mut heap
        };
        self.config.flat_cells(key, idx);
        let min = idx.iter().map(|&i| self.cells[i]).min().unwrap_or(0);
        let target = u64::from(min)
            .saturating_add(count)
            .min(u64::from(u32::MAX)) as u32;
        for &i in idx.iter() {
            if self.cells[i] < target {
                self.cells[i] = target;
            }
        }
    }

    /// Plain (non-conservative) update, kept for dominance checks.
    #[cfg(test)]
    fn add_plain(&mut self, key: &Key, count: u64) {
        let mut idx = vec![0; self.config.depth() as usize];
        self.config.flat_cells(key, &mut idx);
        for i in idx {
            self.cells[i] = (u64::from(self.cells[i]) + count).min(u64::from(u32::MAX)) as u32;
        }
    }

    #[cfg(test)]
    fn cells_mut(&mut self) -> &mut [u32] {
        &mut self.cells
    }
}

impl Sketch for CmsSketch {
    fn config(&self) -> &SketchConfig {
        &self.config
    }

    fn estimate(&self, key: &Key) -> f64 {
        f64::from(self.point(key))
    }

    fn update(&mut self, key: &Key, count: u64) {
        self.add(key, count);
    }

    fn memory_bytes(&self) -> usize {
        self.cells.len() * 4
    }
}
