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

//! `tree-sketch` command-line driver. Exit codes: 0 on success, 1 on a
//! runtime error, 2 on a usage error.

pub mod cli;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;

use cli::{Cli, Command};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::GenZipf(args) => commands::gen_zipf(args),
        Command::Count(args) => commands::count(args),
        Command::Eval(args) => commands::eval(args),
        Command::Query(args) => commands::query(args),
        Command::Merge(args) => commands::merge(args),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match config::expand(args.into_iter().map(Into::into).collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}
