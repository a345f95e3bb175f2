//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach the output.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nblint::dataflow::{access_table_for_cells, find_unused, UnusedPolicy};
use nblint::pipeline::{analyze_notebook, AnalysisConfig};
use nblint::report::{
    analyze_corpus, mean, median, parse_report, render, CorpusReport, Format, CORPUS_NOTE,
};
use nblint::style::{
    check_text, is_implemented, ratio_of_counts, rule_catalog, DEFAULT_MAX_LINE_LENGTH,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;

/// Percentage points.
const RATIO_TOLERANCE_PP: f64 = 0.01;
const STYLE_TIME_LIMIT: Duration = Duration::from_secs(5);
const LINT_TIME_LIMIT: Duration = Duration::from_secs(10);
const MIN_STYLE_FIXTURES: usize = 60;
const MIN_DATAFLOW_FIXTURES: usize = 40;
const SYNTHETIC_NOTEBOOKS: usize = 100;
const CELLS_PER_NOTEBOOK: usize = 50;
const ORACLE_TRIALS: usize = 1000;
const MEAN_TOLERANCE: f64 = 1e-9;

/// Criteria that cannot be met, with the reason. They must fail; a pass
/// means the reason is stale.
const UNATTAINABLE: &[(u32, &str)] = &[(
    4,
    "60,878 / 452,953 is 13.44%, not the published 13.40%; no rounding of these counts gives 13.40%",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixtures(kind: &str) -> PathBuf {
    common::fixture_dir(kind)
}

fn criterion_1() -> Outcome {
    let expected: BTreeMap<String, Vec<(usize, usize, String)>> =
        serde_json::from_str(&fs::read_to_string(fixtures("style").join("expected.json")).unwrap())
            .unwrap();
    let start = Instant::now();
    let mut mismatched = Vec::new();
    let mut seen = BTreeSet::new();
    for (name, want) in &expected {
        let text = fs::read_to_string(fixtures("style").join(format!("{name}.py"))).unwrap();
        let mut got: Vec<(usize, usize, String)> = check_text(&text, DEFAULT_MAX_LINE_LENGTH)
            .into_iter()
            .filter(|f| is_implemented(&f.code))
            .map(|f| (f.line, f.col + 1, f.code))
            .collect();
        got.sort();
        seen.extend(want.iter().map(|(_, _, c)| c.clone()));
        if &got != want {
            mismatched.push(name.clone());
        }
    }
    let elapsed = start.elapsed();
    let all_codes = rule_catalog().iter().all(|r| seen.contains(r.code));
    let edge = |prefix: &str| expected.keys().filter(|k| k.starts_with(prefix)).count();
    let pass = expected.len() >= MIN_STYLE_FIXTURES
        && mismatched.is_empty()
        && all_codes
        && edge("e128") >= 5
        && edge("e225") >= 5
        && elapsed < STYLE_TIME_LIMIT;
    outcome(
        pass,
        format!(
            "{} snippets, {} mismatched {:?}, all 14 codes exercised: {all_codes}, {} E128 and {} E225 cases, {:.2?}",
            expected.len(),
            mismatched.len(),
            mismatched,
            edge("e128"),
            edge("e225"),
            elapsed
        ),
    )
}

fn flagged(cells: &[String], policy: &UnusedPolicy) -> Value {
    let rows: Vec<Value> = find_unused(&access_table_for_cells(cells), policy)
        .into_iter()
        .map(|u| {
            let l = u.defining_location;
            serde_json::json!([u.name, l.entry, l.line, l.column])
        })
        .collect();
    Value::Array(rows)
}

fn criterion_2() -> Outcome {
    let dir = fixtures("dataflow");
    let expected: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("unused.json")).unwrap()).unwrap();
    let mut total = 0;
    let mut agree = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "py") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let cells: Vec<String> = fs::read_to_string(&path)
            .unwrap()
            .split("# %%\n")
            .map(str::to_string)
            .collect();
        total += 1;
        let ok = [
            ("default", UnusedPolicy::default()),
            ("strict", UnusedPolicy::strict()),
        ]
        .iter()
        .all(|(mode, policy)| flagged(&cells, policy) == expected[&name][*mode]);
        agree += usize::from(ok);
    }
    let call_then_use = find_unused(
        &access_table_for_cells(&["x = f(); x"]),
        &UnusedPolicy::default(),
    )
    .len();
    let bare = find_unused(
        &access_table_for_cells(&["y = 2"]),
        &UnusedPolicy::default(),
    );
    let bare_ok = bare.len() == 1 && bare[0].name == "y";
    outcome(
        total >= MIN_DATAFLOW_FIXTURES && agree == total && call_then_use == 0 && bare_ok,
        format!(
            "{agree}/{total} fixtures agree with the oracle, `x = f(); x` gives {call_then_use} findings, `y = 2` gives {}",
            bare.len()
        ),
    )
}

fn d001_targets(cells: &[&str]) -> Vec<String> {
    let nb = nblint::notebook::Notebook::from_code_cells("nb.ipynb", cells);
    analyze_notebook(&nb, &AnalysisConfig::default())
        .diagnostics
        .into_iter()
        .filter(|d| d.code == "D001")
        .map(|d| d.message.split(' ').next().unwrap().to_string())
        .collect()
}

fn criterion_3() -> Outcome {
    const TABLE: [&str; 5] = [
        "sklearn.cross_validation",
        "sklearn.grid_search",
        "sklearn.datasets.fetch_mldata",
        "sklearn.preprocessing.Imputer",
        "sklearn.mixture.GMM",
    ];
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = common::run_cli(&["rules", "--format", "json"], dir.path());
    let listing: Value = serde_json::from_str(&out).unwrap_or(Value::Null);
    let listed: Vec<String> = listing["deprecations"]["rules"]
        .as_array()
        .map(|rules| {
            rules
                .iter()
                .map(|r| r["target"].as_str().unwrap_or("").to_string())
                .collect()
        })
        .unwrap_or_default();
    let rules_ok = code == 0 && listed == TABLE;
    let cases: [(&str, &[&str], &[&str]); 5] = [
        (
            "import a.b",
            &["import sklearn.cross_validation\n"],
            &["sklearn.cross_validation"],
        ),
        (
            "from a.b import c",
            &["from sklearn.grid_search import GridSearchCV\n"],
            &["sklearn.grid_search"],
        ),
        (
            "from a import b",
            &["from sklearn.mixture import GMM\n"],
            &["sklearn.mixture.GMM"],
        ),
        (
            "alias attribute",
            &["import sklearn.preprocessing as pp; pp.Imputer()\n"],
            &["sklearn.preprocessing.Imputer"],
        ),
        (
            "model_selection only",
            &["import sklearn.model_selection\n"],
            &[],
        ),
    ];
    let mut failed = Vec::new();
    for (label, cells, want) in cases {
        if d001_targets(cells) != want {
            failed.push(label);
        }
    }
    outcome(
        rules_ok && failed.is_empty(),
        format!(
            "rules list {} targets matching the table: {rules_ok}; failing fixtures {failed:?}",
            listed.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let pct = |n: usize, d: usize| ratio_of_counts(n, d).unwrap() * 100.0;
    let notebooks = pct(73_371, 202_332);
    let scripts = pct(60_878, 452_953);
    let nb_ok = (notebooks - 36.26).abs() <= RATIO_TOLERANCE_PP;
    let sc_ok = (scripts - 13.40).abs() <= RATIO_TOLERANCE_PP;
    let r = CorpusReport::new(Default::default(), Vec::new(), Vec::new(), Vec::new());
    let readme = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .unwrap_or_default();
    let documented = render(&r, Format::Text).is_ok_and(|t| t.contains(CORPUS_NOTE))
        && readme.contains(CORPUS_NOTE);
    outcome(
        nb_ok && sc_ok && documented,
        format!(
            "73,371/202,332 = {notebooks:.4}% (want 36.26 +/- {RATIO_TOLERANCE_PP}), 60,878/452,953 = {scripts:.4}% (want 13.40 +/- {RATIO_TOLERANCE_PP}), caveat in report and README: {documented}"
        ),
    )
}

fn naive_median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = common::write_corpus(dir.path(), SYNTHETIC_NOTEBOOKS, |i| 2 + i % 25, 1000);
    let cfg = AnalysisConfig::default();
    let report = analyze_corpus(&paths, &cfg).unwrap();
    let consistent =
        report.notebooks.len() == SYNTHETIC_NOTEBOOKS && report.check_consistency().is_ok();
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    paths.shuffle(&mut rng);
    let shuffled = analyze_corpus(&paths, &cfg).unwrap();
    let invariant = shuffled == report;
    let json = render(&report, Format::Json).unwrap();
    let round_trip = parse_report(&json)
        .is_ok_and(|back| back == report && render(&back, Format::Json).unwrap() == json);
    let mut oracle_failures = 0;
    for _ in 0..ORACLE_TRIALS {
        let n = rng.gen_range(1..50);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0..500) as f64).collect();
        let naive_mean = v.iter().sum::<f64>() / n as f64;
        let ok = median(&v) == Some(naive_median(&v))
            && (mean(&v).unwrap() - naive_mean).abs() <= MEAN_TOLERANCE * naive_mean.max(1.0);
        oracle_failures += usize::from(!ok);
    }
    outcome(
        consistent && invariant && round_trip && oracle_failures == 0,
        format!(
            "{} notebooks, aggregates recomputed: {consistent}, permutation invariant: {invariant}, round trip: {round_trip}, median/mean oracle failures {oracle_failures}/{ORACLE_TRIALS}",
            report.notebooks.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    common::write_corpus(dir.path(), SYNTHETIC_NOTEBOOKS, |_| CELLS_PER_NOTEBOOK, 7);
    let path = dir.path().to_str().unwrap();
    let timed = |jobs: &str| {
        let start = Instant::now();
        let result = common::run_cli(&["lint", "--jobs", jobs, path], dir.path());
        (result, start.elapsed())
    };
    let (one, t1) = timed("1");
    let (eight, t8) = timed("8");
    let identical = one == eight && !one.1.is_empty();
    let slowest = t1.max(t8);
    outcome(
        identical && slowest < LINT_TIME_LIMIT,
        format!(
            "{} output lines, byte-identical for --jobs 1 and 8: {identical}, {:.2?} and {:.2?} (limit {:?})",
            one.1.lines().count(),
            t1,
            t8,
            LINT_TIME_LIMIT
        ),
    )
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("broken.ipynb"), "{\"cells\": [").unwrap();
    let magic = [
        ("code", "%%bash\nls -l".to_string()),
        ("code", "%%time\nx = 1".to_string()),
    ];
    fs::write(d.join("magics.ipynb"), common::notebook_json(&magic)).unwrap();
    let syntax = [
        ("code", "a = (".to_string()),
        ("code", "b = 2\nprint(b)".to_string()),
    ];
    fs::write(d.join("syntax.ipynb"), common::notebook_json(&syntax)).unwrap();
    let healthy = [("code", "import numpy as np\nprint(np.pi)".to_string())];
    fs::write(d.join("healthy.ipynb"), common::notebook_json(&healthy)).unwrap();
    let (code, out, err) = common::run_cli(&["report", "--format", "json", d.to_str().unwrap()], d);
    let Ok(report) = parse_report(&out) else {
        return outcome(false, format!("exit {code}, report did not parse: {err}"));
    };
    let codes_for = |name: &str| -> BTreeSet<String> {
        report
            .analysis
            .iter()
            .filter(|diag| diag.location.path.file_name().is_some_and(|f| f == name))
            .map(|diag| diag.code.clone())
            .collect()
    };
    let flagged = codes_for("broken.ipynb").contains("A001")
        && codes_for("magics.ipynb").contains("A003")
        && codes_for("syntax.ipynb").contains("A002");
    let measured: BTreeSet<String> = report
        .notebooks
        .iter()
        .filter_map(|m| m.path.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let healthy_ok = ["healthy.ipynb", "magics.ipynb", "syntax.ipynb"]
        .iter()
        .all(|n| measured.contains(*n));
    outcome(
        code == 0 && flagged && healthy_ok,
        format!("exit {code}, analysis diagnostics A001/A003/A002 present: {flagged}, metrics for {measured:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 7] = [
        (1, "style differential suite", criterion_1),
        (2, "unused-variable oracle suite", criterion_2),
        (3, "deprecation suite", criterion_3),
        (4, "ratio arithmetic", criterion_4),
        (5, "corpus report self-consistency", criterion_5),
        (6, "determinism and performance", criterion_6),
        (7, "robustness", criterion_7),
    ];
    let mut unexpected = 0;
    for (n, name, check) in criteria {
        let result = check();
        let known = UNATTAINABLE.iter().find(|(k, _)| *k == n);
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{status}] {name}: {}", result.detail);
        match (result.pass, known) {
            (false, Some((_, why))) => println!("    expected failure: {why}"),
            (true, Some(_)) => {
                println!("    marked unattainable but passed");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
