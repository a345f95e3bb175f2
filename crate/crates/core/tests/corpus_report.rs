mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use nblint::pipeline::AnalysisConfig;
use nblint::report::{
    analyze_corpus, mean, median, parse_report, render, CorpusReport, Format, NotebookMetrics,
    ReportConfig, ScriptMetrics,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::Value;

fn fixture_report() -> CorpusReport {
    let cfg = AnalysisConfig {
        include_scripts: true,
        ..AnalysisConfig::default()
    };
    analyze_corpus(&[common::fixture_dir("corpus")], &cfg).unwrap()
}

fn name_of(path: &std::path::Path) -> String {
    path.strip_prefix(common::fixture_dir("corpus"))
        .unwrap()
        .to_string_lossy()
        .replace('\\', "/")
}

fn style_only(codes: &BTreeMap<String, usize>) -> BTreeMap<String, usize> {
    codes
        .iter()
        .filter(|(c, _)| c.starts_with('E') || c.starts_with('W'))
        .map(|(c, n)| (c.clone(), *n))
        .collect()
}

fn as_counts(v: &Value) -> BTreeMap<String, usize> {
    v.as_object()
        .unwrap()
        .iter()
        .map(|(k, n)| (k.clone(), n.as_u64().unwrap() as usize))
        .collect()
}

#[test]
fn fixture_corpus_matches_reference_counts() {
    let expected: Value = serde_json::from_str(
        &fs::read_to_string(common::fixture_dir("corpus/expected.json")).unwrap(),
    )
    .unwrap();
    let r = fixture_report();
    assert_eq!(r.notebooks.len(), 4);
    assert_eq!(r.scripts.len(), 2);
    for m in &r.notebooks {
        let want = &expected["notebooks"][name_of(&m.path)];
        assert_eq!(
            m.loc as u64,
            want["loc"].as_u64().unwrap(),
            "{}",
            m.path.display()
        );
        assert_eq!(m.n_code_cells as u64, want["code_cells"].as_u64().unwrap());
        assert_eq!(
            m.markdown_lines as u64,
            want["markdown_lines"].as_u64().unwrap()
        );
        assert_eq!(
            style_only(&m.diagnostics_by_code),
            as_counts(&want["style"]),
            "{}",
            m.path.display()
        );
    }
    for m in &r.scripts {
        let want = &expected["scripts"][name_of(&m.path)];
        assert_eq!(m.loc as u64, want["loc"].as_u64().unwrap());
        let mut got = style_only(&m.diagnostics_by_code);
        got.remove("W292");
        assert_eq!(got, as_counts(&want["style"]), "{}", m.path.display());
    }
    let a = &r.aggregates;
    let ratio = |v: &Value| {
        (
            v[0].as_u64().unwrap() as usize,
            v[1].as_u64().unwrap() as usize,
            v[2].as_f64().unwrap(),
        )
    };
    let (n, loc, q) = ratio(&expected["notebook_ratio"]);
    assert_eq!(
        (
            a.notebooks.style_findings,
            a.notebooks.loc,
            a.notebooks.error_ratio
        ),
        (n, loc, Some(q))
    );
    let (n, loc, q) = ratio(&expected["script_ratio"]);
    assert_eq!(
        (
            a.scripts.style_findings,
            a.scripts.loc,
            a.scripts.error_ratio
        ),
        (n, loc, Some(q))
    );
    assert_eq!(a.loc.median, expected["loc_median"].as_f64().unwrap());
    assert_eq!(a.loc.mean, expected["loc_mean"].as_f64().unwrap());
}

#[test]
fn fixture_corpus_unused_and_deprecations() {
    let r = fixture_report();
    let by_name: BTreeMap<String, &NotebookMetrics> =
        r.notebooks.iter().map(|m| (name_of(&m.path), m)).collect();
    assert_eq!(by_name["explore.ipynb"].n_unused, 2);
    assert_eq!(by_name["iris_svm.ipynb"].n_unused, 1);
    assert_eq!(by_name["empty.ipynb"].text_code_ratio, None);
    let d = &r.aggregates.deprecation;
    assert_eq!(
        d.rows,
        vec![
            ("sklearn.cross_validation".to_string(), 1),
            ("sklearn.preprocessing.Imputer".to_string(), 1)
        ]
    );
    assert_eq!((d.affected_notebooks, d.library_notebooks), (2, 2));
    assert_eq!(r.aggregates.unused.total_unused, 3);
    assert!(!r.aggregates.comparison.partial);
}

#[test]
fn input_order_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = common::write_corpus(dir.path(), 20, |i| 3 + i % 7, 11);
    let cfg = AnalysisConfig::default();
    let first = render(&analyze_corpus(&paths, &cfg).unwrap(), Format::Json).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..3 {
        paths.shuffle(&mut rng);
        let again = render(&analyze_corpus(&paths, &cfg).unwrap(), Format::Json).unwrap();
        assert_eq!(first, again);
    }
    let by_dir = render(
        &analyze_corpus(&[dir.path().to_path_buf()], &cfg).unwrap(),
        Format::Json,
    )
    .unwrap();
    assert_eq!(first, by_dir);
}

#[test]
fn cell_count_median_tracks_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    common::write_corpus(dir.path(), 10, |i| if i % 2 == 0 { 4 } else { 14 }, 3);
    let r = analyze_corpus(&[dir.path().to_path_buf()], &AnalysisConfig::default()).unwrap();
    let more_than_ten = r.notebooks.iter().filter(|m| m.n_code_cells > 10).count();
    assert_eq!(more_than_ten, 5);
    assert_eq!(r.aggregates.code_cells.median, 9.0);
    common::write_corpus(dir.path(), 11, |i| if i % 2 == 0 { 12 } else { 4 }, 3);
    let r = analyze_corpus(&[dir.path().to_path_buf()], &AnalysisConfig::default()).unwrap();
    assert!(r.notebooks.iter().filter(|m| m.n_code_cells > 10).count() * 2 > r.notebooks.len());
    assert!(r.aggregates.code_cells.median > 10.0);
}

fn naive_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
            }
        }
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn naive_mean(values: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in values {
        total += v;
    }
    total / values.len() as f64
}

fn codes() -> impl Strategy<Value = BTreeMap<String, usize>> {
    prop::collection::btree_map(
        prop::sample::select(vec![
            "E231", "E501", "E225", "W291", "W292", "E302", "U001", "D001", "A002",
        ])
        .prop_map(str::to_string),
        0usize..50,
        0..6,
    )
}

fn notebook() -> impl Strategy<Value = NotebookMetrics> {
    (
        0usize..400,
        0usize..30,
        0usize..40,
        codes(),
        any::<bool>(),
        0usize..3,
    )
        .prop_map(|(loc, cells, md, codes, lib, dep)| {
            let targets: BTreeSet<String> = ["sklearn.grid_search", "sklearn.mixture.GMM"]
                [..dep.min(2)]
                .iter()
                .map(|s| s.to_string())
                .collect();
            NotebookMetrics {
                path: PathBuf::new(),
                loc,
                n_code_cells: cells,
                n_markdown_cells: cells / 2,
                markdown_lines: md,
                n_unused: codes.get("U001").copied().unwrap_or(0),
                n_deprecated: targets.len(),
                diagnostics_by_code: codes,
                text_code_ratio: (loc > 0).then(|| md as f64 / loc as f64),
                deprecated_targets: targets,
                imports_library: lib || dep > 0,
            }
        })
}

fn script() -> impl Strategy<Value = ScriptMetrics> {
    (0usize..400, codes()).prop_map(|(loc, diagnostics_by_code)| ScriptMetrics {
        path: PathBuf::new(),
        loc,
        diagnostics_by_code,
    })
}

fn report_of(mut notebooks: Vec<NotebookMetrics>, mut scripts: Vec<ScriptMetrics>) -> CorpusReport {
    for (i, m) in notebooks.iter_mut().enumerate() {
        m.path = format!("nb/{i:03}.ipynb").into();
    }
    for (i, m) in scripts.iter_mut().enumerate() {
        m.path = format!("src/{i:03}.py").into();
    }
    CorpusReport::new(ReportConfig::default(), notebooks, scripts, Vec::new())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn median_and_mean_match_naive_versions(values in prop::collection::vec(-1.0e6f64..1.0e6, 1..60)) {
        prop_assert_eq!(median(&values), Some(naive_median(&values)));
        let m = mean(&values).unwrap();
        prop_assert!((m - naive_mean(&values)).abs() <= 1e-9 * (1.0 + m.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_round_trip_is_lossless(
        notebooks in prop::collection::vec(notebook(), 0..12),
        scripts in prop::collection::vec(script(), 0..6),
    ) {
        let r = report_of(notebooks, scripts);
        let json = render(&r, Format::Json).unwrap();
        let back = parse_report(&json).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(render(&back, Format::Json).unwrap(), json);
        prop_assert_eq!(render(&back, Format::Text).unwrap(), render(&r, Format::Text).unwrap());
    }

    #[test]
    fn aggregates_do_not_depend_on_item_order(
        notebooks in prop::collection::vec(notebook(), 1..12),
        seed in any::<u64>(),
    ) {
        let r = report_of(notebooks, Vec::new());
        let mut items = r.notebooks.clone();
        items.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let again = CorpusReport::new(ReportConfig::default(), items, Vec::new(), Vec::new());
        prop_assert_eq!(again, r);
    }
}
