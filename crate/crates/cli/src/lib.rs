//! Command-line front end: argument types, config parsing, the commands
//! and their result documents.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod document;
pub mod error;

use std::time::Instant;

use args::{Cli, Command, OutFormat};
use document::{Document, RunManifest};
use error::CliError;
use serde_json::Value;

fn echo<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

/// Runs the selected command and wraps its outcome in a document.
pub fn run(cli: &Cli) -> Result<Document, CliError> {
    let start = Instant::now();
    let (name, mut params, outcome) = match &cli.command {
        Command::Parallel(a) => ("parallel", echo(a), commands::cmd_parallel(a)?),
        Command::Antiparallel(a) => ("antiparallel", echo(a), commands::cmd_antiparallel(a)?),
        Command::Use(a) => ("use", echo(a), commands::cmd_use(a)?),
        Command::DualitySuite(a) => ("duality-suite", echo(a), commands::cmd_duality_suite(a)?),
        Command::Game(a) => ("game", echo(a), commands::cmd_game(a)?),
    };
    if let (Value::Object(p), Some(Value::Object(r))) = (&mut params, outcome.resolved) {
        p.insert("resolved".into(), Value::Object(r));
    }
    let manifest = RunManifest {
        command: name.into(),
        params,
        seed: outcome.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Document::new(manifest, outcome.passed, outcome.warnings, &outcome.table))
}

pub fn render(doc: &Document, format: OutFormat) -> Result<String, CliError> {
    match format {
        OutFormat::Json => doc.to_json(),
        OutFormat::Csv => doc.to_csv(),
    }
}
