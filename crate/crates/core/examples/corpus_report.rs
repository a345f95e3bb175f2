//! Builds a corpus report over a directory of notebooks and prints it.
//!
//! cargo run --example corpus_report -- path/to/notebooks [--json]

use std::path::PathBuf;

use nblint::pipeline::AnalysisConfig;
use nblint::report::{analyze_corpus, render, Format};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus"));
    let format = if args.next().as_deref() == Some("--json") {
        Format::Json
    } else {
        Format::Text
    };
    let cfg = AnalysisConfig {
        include_scripts: true,
        ..AnalysisConfig::default()
    };
    match analyze_corpus(&[dir], &cfg) {
        Ok(report) => print!("{}", render(&report, format).unwrap()),
        Err(e) => eprintln!("{e}"),
    }
}
