//! Corpus-level metrics over notebooks and their companion scripts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataflow::UnusedPolicy;
use crate::deprecation::{summarize_targets, DeprecationSummary, NotebookDeprecations};
use crate::diagnostic::{Category, Diagnostic};
use crate::pipeline::{analyze_inputs, resolve_inputs, AnalysisConfig, Metrics};
use crate::style::{self, FILE_RELATED_CODES};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOP_N: usize = 10;

pub const LOC_DEFINITION: &str =
    "non-blank lines of code-cell source after IPython magics and shell escapes are blanked; comment lines count";
pub const PERCENTILE_METHOD: &str =
    "linear interpolation between closest ranks; the median of an even-sized sample is the mean of the two central values";
pub const DEPRECATION_MATCHING: &str =
    "a use matches a rule when its resolved path equals the target or lies under it";
pub const CORPUS_NOTE: &str =
    "corpus-level ratios describe the analysed corpus only and are not expected to match figures measured on other corpora";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotebookMetrics {
    pub path: PathBuf,
    pub loc: usize,
    pub n_code_cells: usize,
    pub n_markdown_cells: usize,
    /// Non-blank markdown lines.
    pub markdown_lines: usize,
    pub diagnostics_by_code: BTreeMap<String, usize>,
    pub n_unused: usize,
    pub n_deprecated: usize,
    /// `markdown_lines / loc`; absent when `loc` is zero.
    pub text_code_ratio: Option<f64>,
    pub deprecated_targets: BTreeSet<String>,
    /// Imports a package covered by the loaded rulesets.
    pub imports_library: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptMetrics {
    pub path: PathBuf,
    pub loc: usize,
    pub diagnostics_by_code: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulesetEcho {
    pub library: String,
    pub source: String,
    pub targets: Vec<String>,
}

/// Settings the numbers depend on, stored with them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub style_reference: String,
    pub max_line_length: usize,
    pub select: Vec<String>,
    pub ignore: Vec<String>,
    pub unused_policy: UnusedPolicy,
    pub dead_stores: bool,
    pub unused_imports: bool,
    pub include_scripts: bool,
    pub rulesets: Vec<RulesetEcho>,
    /// Codes left out of error ratios and rankings.
    pub excluded_codes: Vec<String>,
    pub loc_definition: String,
    pub percentile_method: String,
    pub deprecation_matching: String,
    pub note: String,
}

impl ReportConfig {
    pub fn from_analysis(cfg: &AnalysisConfig) -> ReportConfig {
        ReportConfig {
            style_reference: "pycodestyle 2.15 semantics, default options".into(),
            max_line_length: cfg.rules.max_line_length,
            select: cfg.rules.select.clone(),
            ignore: cfg.rules.ignore.clone(),
            unused_policy: cfg.unused.policy,
            dead_stores: cfg.unused.dead_stores,
            unused_imports: cfg.unused.unused_imports,
            include_scripts: cfg.include_scripts,
            rulesets: vec![RulesetEcho {
                library: cfg.ruleset.library.clone(),
                source: cfg.ruleset.source.clone(),
                targets: cfg.ruleset.rules.iter().map(|r| r.target.clone()).collect(),
            }],
            excluded_codes: if cfg.file_related {
                Vec::new()
            } else {
                FILE_RELATED_CODES.iter().map(|c| c.to_string()).collect()
            },
            loc_definition: LOC_DEFINITION.into(),
            percentile_method: PERCENTILE_METHOD.into(),
            deprecation_matching: DEPRECATION_MATCHING.into(),
            note: CORPUS_NOTE.into(),
        }
    }

    fn counts_toward_ratio(&self, code: &str) -> bool {
        style::is_implemented(code) && !self.excluded_codes.iter().any(|c| c == code)
    }
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig::from_analysis(&AnalysisConfig::default())
    }
}

/// Five-number summary plus mean. All zero for an empty sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distribution {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    pub max: f64,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    }
}

/// Quantile with linear interpolation between closest ranks.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    (!values.is_empty()).then(|| quantile_sorted(&sorted(values), q.clamp(0.0, 1.0)))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let v = sorted(values);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

/// Mean, summed in ascending order so the result does not depend on input order.
pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| sorted(values).iter().sum::<f64>() / values.len() as f64)
}

impl Distribution {
    pub fn of(values: &[f64]) -> Distribution {
        if values.is_empty() {
            return Distribution::default();
        }
        let v = sorted(values);
        Distribution {
            n: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: median(&v).unwrap_or_default(),
            q3: quantile_sorted(&v, 0.75),
            mean: mean(&v).unwrap_or_default(),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupTotals {
    pub items: usize,
    pub loc: usize,
    /// Style findings counted toward the ratio.
    pub style_findings: usize,
    /// `style_findings / loc`; absent when `loc` is zero.
    pub error_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopCodes {
    pub notebooks: Vec<(String, usize)>,
    pub scripts: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupComparison {
    pub notebook_ratio: Option<f64>,
    pub script_ratio: Option<f64>,
    /// Notebook ratio minus script ratio.
    pub difference: Option<f64>,
    /// Jaccard index of the two top-10 code sets.
    pub top_overlap: Option<f64>,
    pub shared_top_codes: Vec<String>,
    /// Set when either group is empty or has no code.
    pub partial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UnusedSummary {
    pub notebooks_with_unused: usize,
    pub total_unused: usize,
}

/// Values derived from the per-item metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub loc: Distribution,
    pub code_cells: Distribution,
    pub notebooks: GroupTotals,
    pub scripts: GroupTotals,
    pub top_codes: TopCodes,
    pub comparison: GroupComparison,
    pub unused: UnusedSummary,
    pub deprecation: DeprecationSummary,
    /// Corpus-wide markdown lines per line of code.
    pub text_code_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub notebooks: Vec<NotebookMetrics>,
    pub scripts: Vec<ScriptMetrics>,
    /// Analysis-category diagnostics from every file, healthy or not.
    pub analysis: Vec<Diagnostic>,
    pub aggregates: Aggregates,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no notebooks or scripts found in the given paths")]
    NoInputs,
    #[error("invalid report document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("report aggregates disagree with per-item metrics: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

fn ranked(counts: BTreeMap<String, usize>, n: usize) -> Vec<(String, usize)> {
    let mut rows: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(n);
    rows
}

fn style_counts<'a>(
    config: &ReportConfig,
    maps: impl Iterator<Item = &'a BTreeMap<String, usize>>,
) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for m in maps {
        for (code, n) in m {
            if config.counts_toward_ratio(code) {
                *out.entry(code.clone()).or_insert(0) += n;
            }
        }
    }
    out
}

fn totals<'a>(
    config: &ReportConfig,
    items: usize,
    loc: usize,
    maps: impl Iterator<Item = &'a BTreeMap<String, usize>>,
) -> GroupTotals {
    let style_findings = style_counts(config, maps).values().sum();
    GroupTotals {
        items,
        loc,
        style_findings,
        error_ratio: style::ratio_of_counts(style_findings, loc).ok(),
    }
}

fn top_codes_of(
    config: &ReportConfig,
    notebooks: &[NotebookMetrics],
    scripts: &[ScriptMetrics],
    n: usize,
) -> TopCodes {
    TopCodes {
        notebooks: ranked(
            style_counts(config, notebooks.iter().map(|m| &m.diagnostics_by_code)),
            n,
        ),
        scripts: ranked(
            style_counts(config, scripts.iter().map(|m| &m.diagnostics_by_code)),
            n,
        ),
    }
}

fn compare(nb: &GroupTotals, sc: &GroupTotals, top: &TopCodes) -> GroupComparison {
    let a: BTreeSet<&str> = top.notebooks.iter().map(|(c, _)| c.as_str()).collect();
    let b: BTreeSet<&str> = top.scripts.iter().map(|(c, _)| c.as_str()).collect();
    let union = a.union(&b).count();
    let shared: Vec<String> = a.intersection(&b).map(|c| c.to_string()).collect();
    let difference = match (nb.error_ratio, sc.error_ratio) {
        (Some(x), Some(y)) => Some(x - y),
        _ => None,
    };
    GroupComparison {
        notebook_ratio: nb.error_ratio,
        script_ratio: sc.error_ratio,
        difference,
        top_overlap: (union > 0).then(|| shared.len() as f64 / union as f64),
        shared_top_codes: shared,
        partial: difference.is_none(),
    }
}

/// Recomputes every aggregate from per-item metrics.
pub fn aggregate(
    config: &ReportConfig,
    notebooks: &[NotebookMetrics],
    scripts: &[ScriptMetrics],
) -> Aggregates {
    let nb_loc: usize = notebooks.iter().map(|m| m.loc).sum();
    let nb = totals(
        config,
        notebooks.len(),
        nb_loc,
        notebooks.iter().map(|m| &m.diagnostics_by_code),
    );
    let sc = totals(
        config,
        scripts.len(),
        scripts.iter().map(|m| m.loc).sum(),
        scripts.iter().map(|m| &m.diagnostics_by_code),
    );
    let top = top_codes_of(config, notebooks, scripts, TOP_N);
    let per_nb: Vec<NotebookDeprecations> = notebooks
        .iter()
        .map(|m| NotebookDeprecations {
            targets: m.deprecated_targets.clone(),
            imports_library: m.imports_library,
        })
        .collect();
    let targets: Vec<&str> = config
        .rulesets
        .iter()
        .flat_map(|r| r.targets.iter().map(String::as_str))
        .collect();
    let markdown: usize = notebooks.iter().map(|m| m.markdown_lines).sum();
    let as_f64 = |f: fn(&NotebookMetrics) -> usize| {
        notebooks.iter().map(|m| f(m) as f64).collect::<Vec<_>>()
    };
    Aggregates {
        loc: Distribution::of(&as_f64(|m| m.loc)),
        code_cells: Distribution::of(&as_f64(|m| m.n_code_cells)),
        comparison: compare(&nb, &sc, &top),
        notebooks: nb,
        scripts: sc,
        top_codes: top,
        unused: UnusedSummary {
            notebooks_with_unused: notebooks.iter().filter(|m| m.n_unused > 0).count(),
            total_unused: notebooks.iter().map(|m| m.n_unused).sum(),
        },
        deprecation: summarize_targets(&per_nb, &targets),
        text_code_ratio: (nb_loc > 0).then(|| markdown as f64 / nb_loc as f64),
    }
}

impl CorpusReport {
    /// Builds a report. Items are ordered by path so the result does not
    /// depend on the order they arrive in.
    pub fn new(
        config: ReportConfig,
        mut notebooks: Vec<NotebookMetrics>,
        mut scripts: Vec<ScriptMetrics>,
        mut analysis: Vec<Diagnostic>,
    ) -> CorpusReport {
        notebooks.sort_by(|a, b| a.path.cmp(&b.path));
        scripts.sort_by(|a, b| a.path.cmp(&b.path));
        analysis.sort_by(|a, b| {
            (&a.location.path, a.sort_key(), &a.message).cmp(&(
                &b.location.path,
                b.sort_key(),
                &b.message,
            ))
        });
        let aggregates = aggregate(&config, &notebooks, &scripts);
        CorpusReport {
            schema_version: SCHEMA_VERSION,
            config,
            notebooks,
            scripts,
            analysis,
            aggregates,
        }
    }

    pub fn check_consistency(&self) -> Result<(), ReportError> {
        let fresh = aggregate(&self.config, &self.notebooks, &self.scripts);
        let fields = [
            ("loc", fresh.loc == self.aggregates.loc),
            ("code_cells", fresh.code_cells == self.aggregates.code_cells),
            ("notebooks", fresh.notebooks == self.aggregates.notebooks),
            ("scripts", fresh.scripts == self.aggregates.scripts),
            ("top_codes", fresh.top_codes == self.aggregates.top_codes),
            ("comparison", fresh.comparison == self.aggregates.comparison),
            ("unused", fresh.unused == self.aggregates.unused),
            (
                "deprecation",
                fresh.deprecation == self.aggregates.deprecation,
            ),
            (
                "text_code_ratio",
                fresh.text_code_ratio == self.aggregates.text_code_ratio,
            ),
        ];
        let bad: Vec<&str> = fields
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| *name)
            .collect();
        for m in &self.notebooks {
            let expected = (m.loc > 0).then(|| m.markdown_lines as f64 / m.loc as f64);
            if m.text_code_ratio != expected {
                return Err(ReportError::Inconsistent(format!(
                    "text_code_ratio of {}",
                    m.path.display()
                )));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(ReportError::Inconsistent(bad.join(", ")))
        }
    }
}

/// Ranked style codes per group, at most `n` each.
pub fn top_codes(report: &CorpusReport, n: usize) -> TopCodes {
    top_codes_of(&report.config, &report.notebooks, &report.scripts, n.max(1))
}

pub fn compare_groups(report: &CorpusReport) -> GroupComparison {
    let a = &report.aggregates;
    compare(&a.notebooks, &a.scripts, &top_codes(report, TOP_N))
}

/// Runs the full pipeline over `paths` and aggregates the results.
pub fn analyze_corpus(
    paths: &[PathBuf],
    cfg: &AnalysisConfig,
) -> Result<CorpusReport, ReportError> {
    let resolved = resolve_inputs(paths, cfg.include_scripts);
    if resolved.inputs.is_empty() {
        return Err(ReportError::NoInputs);
    }
    let mut notebooks = Vec::new();
    let mut scripts = Vec::new();
    let mut analysis = resolved.unresolved;
    for file in analyze_inputs(&resolved.inputs, cfg) {
        analysis.extend(
            file.diagnostics
                .into_iter()
                .filter(|d| d.category == Category::Analysis),
        );
        match file.metrics {
            Some(Metrics::Notebook(m)) => notebooks.push(m),
            Some(Metrics::Script(m)) => scripts.push(m),
            None => {}
        }
    }
    Ok(CorpusReport::new(
        ReportConfig::from_analysis(cfg),
        notebooks,
        scripts,
        analysis,
    ))
}

pub fn render(report: &CorpusReport, format: Format) -> Result<String, ReportError> {
    report.check_consistency()?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Text => render_text(report),
    })
}

/// Parses a JSON report and checks it against its own per-item data.
pub fn parse_report(text: &str) -> Result<CorpusReport, ReportError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .unwrap_or(0);
    if version != u64::from(SCHEMA_VERSION) {
        return Err(ReportError::SchemaVersion(
            u32::try_from(version).unwrap_or(u32::MAX),
        ));
    }
    let report: CorpusReport = serde_json::from_value(value)?;
    report.check_consistency()?;
    Ok(report)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", v * 100.0))
}

fn render_text(r: &CorpusReport) -> String {
    let a = &r.aggregates;
    let mut s = String::new();
    let _ = writeln!(s, "nblint corpus report (schema {})", r.schema_version);
    let _ = writeln!(s);
    let _ = writeln!(s, "notebooks analysed     {}", a.notebooks.items);
    let _ = writeln!(s, "scripts analysed       {}", a.scripts.items);
    let _ = writeln!(s, "analysis diagnostics   {}", r.analysis.len());
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "per notebook           n       min        q1    median        q3      mean       max"
    );
    for (name, d) in [("lines of code", &a.loc), ("code cells", &a.code_cells)] {
        let _ = writeln!(
            s,
            "{name:<16} {:>7} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            d.n, d.min, d.q1, d.median, d.q3, d.mean, d.max
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "style error ratio      findings        loc     ratio");
    for (name, g) in [("notebooks", &a.notebooks), ("scripts", &a.scripts)] {
        let _ = writeln!(
            s,
            "{name:<20} {:>10} {:>10} {:>9}",
            g.style_findings,
            g.loc,
            pct(g.error_ratio)
        );
    }
    let c = &a.comparison;
    let diff = c.difference.map_or_else(
        || "n/a".to_string(),
        |d| format!("{:+.2} points", d * 100.0),
    );
    let _ = writeln!(s, "difference             {diff}");
    let _ = writeln!(s, "top-{TOP_N} overlap         {}", pct(c.top_overlap));
    if c.partial {
        let _ = writeln!(s, "comparison is partial: a group has no lines of code");
    }
    for (name, rows) in [
        ("notebooks", &a.top_codes.notebooks),
        ("scripts", &a.top_codes.scripts),
    ] {
        let _ = writeln!(s);
        let _ = writeln!(s, "top style codes, {name}");
        if rows.is_empty() {
            let _ = writeln!(s, "  (none)");
        }
        for (i, (code, n)) in rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>3}  {code}  {n:>8}  {}",
                i + 1,
                style::remark(code).unwrap_or("")
            );
        }
    }
    let _ = writeln!(s);
    let u = &a.unused;
    let _ = writeln!(
        s,
        "unused variables       {} findings in {} notebooks",
        u.total_unused, u.notebooks_with_unused
    );
    let _ = writeln!(s);
    let d = &a.deprecation;
    let _ = writeln!(s, "deprecated API use     notebooks");
    if d.rows.is_empty() {
        let _ = writeln!(s, "  (none)");
    }
    for (target, n) in &d.rows {
        let _ = writeln!(s, "  {target:<40} {n:>6}");
    }
    let _ = writeln!(
        s,
        "{} of {} notebooks importing a covered library use a deprecated API ({})",
        d.affected_notebooks,
        d.library_notebooks,
        pct(d.affected_fraction)
    );
    let _ = writeln!(s);
    let ratio = a
        .text_code_ratio
        .map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
    let _ = writeln!(s, "markdown lines per LOC {ratio}");
    if !r.analysis.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "analysis diagnostics");
        for diag in &r.analysis {
            let _ = writeln!(s, "  {diag}");
        }
    }
    let cfg = &r.config;
    let _ = writeln!(s);
    let _ = writeln!(s, "configuration");
    let _ = writeln!(
        s,
        "  style rules          {}, max line length {}",
        cfg.style_reference, cfg.max_line_length
    );
    let _ = writeln!(
        s,
        "  select / ignore      [{}] / [{}]",
        cfg.select.join(","),
        cfg.ignore.join(",")
    );
    let _ = writeln!(
        s,
        "  excluded from ratios {}",
        cfg.excluded_codes.join(", ")
    );
    for rs in &cfg.rulesets {
        let _ = writeln!(
            s,
            "  ruleset              {} ({} rules; {})",
            rs.library,
            rs.targets.len(),
            rs.source
        );
    }
    let _ = writeln!(s, "  lines of code        {}", cfg.loc_definition);
    let _ = writeln!(s, "  percentiles          {}", cfg.percentile_method);
    let _ = writeln!(s, "  deprecation match    {}", cfg.deprecation_matching);
    let _ = writeln!(s, "  note                 {}", cfg.note);
    s
}
