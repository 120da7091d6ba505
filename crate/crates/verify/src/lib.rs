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

//! Helpers for the acceptance suite: seed-averaged sweep results and
//! pass/fail reporting.

use std::collections::BTreeMap;
use std::fmt;

use tree_sketch::eval::{ErrorReport, Variant};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Mean errors over seeds at one (variant, pressure) point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Averages {
    pub are: f64,
    pub rmse: f64,
    pub pmi_rmse: f64,
    pub seeds: usize,
}

/// Sweep reports averaged over seeds.
#[derive(Debug, Clone, Default)]
pub struct SeedAverages {
    points: BTreeMap<(Variant, u64), Averages>,
}

impl SeedAverages {
    pub fn new(reports: &[ErrorReport]) -> Self {
        let mut points: BTreeMap<(Variant, u64), Averages> = BTreeMap::new();
        for r in reports {
            let a = points.entry((r.variant, r.pressure.to_bits())).or_default();
            a.are += r.are;
            a.rmse += r.rmse;
            a.pmi_rmse += r.pmi_rmse;
            a.seeds += 1;
        }
        for a in points.values_mut() {
            let n = a.seeds as f64;
            a.are /= n;
            a.rmse /= n;
            a.pmi_rmse /= n;
        }
        SeedAverages { points }
    }

    pub fn get(&self, variant: Variant, pressure: f64) -> Option<Averages> {
        self.points.get(&(variant, pressure.to_bits())).copied()
    }

    /// Pressures present for `variant`, ascending.
    pub fn pressures(&self, variant: Variant) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .points
            .keys()
            .filter(|(v, _)| *v == variant)
            .map(|&(_, p)| f64::from_bits(p))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}
