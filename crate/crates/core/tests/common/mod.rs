#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

/// An nbformat 4 document. `kind` is "code", "markdown" or "raw".
pub fn notebook_json(cells: &[(&str, String)]) -> String {
    let cells: Vec<Value> = cells
        .iter()
        .enumerate()
        .map(|(i, (kind, src))| {
            let mut lines: Vec<String> = src.split_inclusive('\n').map(str::to_string).collect();
            if lines.is_empty() {
                lines.push(String::new());
            }
            let mut cell = json!({"cell_type": kind, "metadata": {}, "source": lines});
            if *kind == "code" {
                cell["execution_count"] = json!(i + 1);
                cell["outputs"] = json!([]);
            }
            cell
        })
        .collect();
    let doc = json!({
        "nbformat": 4,
        "nbformat_minor": 2,
        "metadata": {"kernelspec": {"language": "python", "name": "python3"}},
        "cells": cells,
    });
    serde_json::to_string_pretty(&doc).unwrap()
}

const SNIPPETS: &[&str] = &[
    "import numpy as np\nvalues{i} = np.arange({i})",
    "total{i}=sum(range({i}))\nprint(total{i})",
    "def helper{i}(a, b = 2):\n    return a+b\nprint(helper{i}(1))",
    "%matplotlib inline\nframe{i} = {{'a':1, 'b':2}}",
    "from sklearn.cross_validation import train_test_split\nsplit{i} = train_test_split([1, 2], [3, 4])",
    "unused{i} = {i}",
    "for k in range({i}):\n    print(k)  # loop",
    "#note {i}\nx{i} = [n for n in range(3)];",
    "text{i} = 'a fairly long string that keeps going so the line ends up longer than seventy-nine characters'",
    "!pip install something\nresult{i} = {i} * 2  \nprint(result{i})",
    "if True:\n  indented{i} = 1\n  print(indented{i})",
    "import sklearn.preprocessing as pp\nimp{i} = pp.Imputer()\nprint(imp{i})",
];

/// Deterministic pseudo-random notebook cells.
pub fn synthetic_cells(seed: u64, n_code: usize) -> Vec<(&'static str, String)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut cells = Vec::new();
    for i in 0..n_code {
        if rng.gen_bool(0.3) {
            cells.push((
                "markdown",
                format!("## Step {i}\n\nSome words about step {i}."),
            ));
        }
        let snippet = SNIPPETS[rng.gen_range(0..SNIPPETS.len())];
        cells.push((
            "code",
            snippet
                .replace("{i}", &i.to_string())
                .replace("{{", "{")
                .replace("}}", "}"),
        ));
    }
    cells
}

/// Writes `n` synthetic notebooks into `dir` and returns their paths.
pub fn write_corpus(
    dir: &Path,
    n: usize,
    cells: impl Fn(usize) -> usize,
    seed: u64,
) -> Vec<PathBuf> {
    (0..n)
        .map(|i| {
            let path = dir.join(format!("nb_{i:03}.ipynb"));
            fs::write(
                &path,
                notebook_json(&synthetic_cells(seed + i as u64, cells(i))),
            )
            .unwrap();
            path
        })
        .collect()
}

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Runs the command line in-process; returns (exit code, stdout, stderr).
pub fn run_cli(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["nblint"];
    argv.extend_from_slice(args);
    let code = nblint::cli::run(argv, cwd, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}
