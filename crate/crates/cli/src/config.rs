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

//! `--config` support: a flat TOML table whose keys name long flags of the
//! chosen subcommand. The expanded flags are placed before the ones typed on
//! the command line, which therefore override them.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use toml::Value;

/// Flags equivalent to the TOML document `text`. Keys may use `_` or `-`.
/// Arrays become comma-separated lists; `true` becomes a bare switch and
/// `false` drops the key.
pub fn flags_from_toml(text: &str) -> Result<Vec<String>> {
    let table: toml::Table = text.parse().context("config is not valid TOML")?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Boolean(true) => flags.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                let items: Result<Vec<String>> =
                    items.into_iter().map(|v| scalar(&key, v)).collect();
                flags.push(flag);
                flags.push(items?.join(","));
            }
            other => {
                flags.push(flag);
                flags.push(scalar(&key, other)?);
            }
        }
    }
    Ok(flags)
}

fn scalar(key: &str, value: Value) -> Result<String> {
    Ok(match value {
        Value::String(s) => s,
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        _ => bail!("config key {key:?} must be a scalar or a list of scalars"),
    })
}

/// Rewrites `args` so that the flags of the `--config` file, if any, sit
/// right after the subcommand name. Returns `args` unchanged without one.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = iter.next();
        } else if let Some(path) = arg.to_str().and_then(|a| a.strip_prefix("--config=")) {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let flags = flags_from_toml(&text).with_context(|| format!("in {}", path.display()))?;
    // The subcommand is the first argument after the program name that is
    // not a flag.
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    rest.splice(at..at, flags.into_iter().map(OsString::from));
    Ok(rest)
}
