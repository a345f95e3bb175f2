//! Lints one notebook and prints every finding.
//!
//! cargo run --example lint_notebook -- path/to/notebook.ipynb

use std::path::PathBuf;

use nblint::pipeline::{analyze_notebook_file, AnalysisConfig};

fn main() {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus/explore.ipynb")
        });
    let result = analyze_notebook_file(&path, &AnalysisConfig::default());
    for d in &result.diagnostics {
        println!("{d}");
    }
    println!("{} findings", result.diagnostics.len());
}
