//! PEP 8 subset checker.
//!
//! Rule semantics follow pycodestyle 2.15 with its default options; only the
//! fourteen codes in [`rule_catalog`] are reported.

mod checks;
mod engine;
mod text;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{Category, Diagnostic, Location};
use crate::notebook::PythonSource;

pub use engine::{check_text, RawFinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Physical,
    Logical,
    BlankStructure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleRule {
    pub code: &'static str,
    pub message_template: &'static str,
    pub phase: Phase,
    pub enabled: bool,
    /// File-related rules are left out of ratios and rankings unless asked for.
    pub file_related: bool,
}

const CATALOG: [(&str, &str, Phase); 14] = [
    (
        "E111",
        "indentation is not a multiple of four",
        Phase::Logical,
    ),
    (
        "E128",
        "continuation line under-indented for visual indent",
        Phase::Logical,
    ),
    ("E201", "whitespace after (", Phase::Logical),
    ("E225", "missing whitespace around operator", Phase::Logical),
    (
        "E231",
        "missing whitespace after ,, ;, or :",
        Phase::Logical,
    ),
    (
        "E251",
        "unexpected spaces around keyword / parameter equals",
        Phase::Logical,
    ),
    (
        "E261",
        "at least two spaces before inline comment",
        Phase::Logical,
    ),
    ("E265", "block comment should start with #", Phase::Logical),
    (
        "E302",
        "expected 2 blank lines, found 0",
        Phase::BlankStructure,
    ),
    ("E501", "line too long", Phase::Physical),
    ("E703", "statement ends with a semicolon", Phase::Logical),
    ("W291", "trailing whitespace", Phase::Physical),
    ("W292", "no newline at end of file", Phase::Physical),
    ("W293", "blank line contains whitespace", Phase::Physical),
];

/// Codes excluded from ratios and rankings by default.
pub const FILE_RELATED_CODES: [&str; 1] = ["W292"];

/// Every implemented rule, in code order.
pub fn rule_catalog() -> Vec<StyleRule> {
    CATALOG
        .iter()
        .map(|&(code, message_template, phase)| StyleRule {
            code,
            message_template,
            phase,
            enabled: true,
            file_related: FILE_RELATED_CODES.contains(&code),
        })
        .collect()
}

pub fn is_implemented(code: &str) -> bool {
    CATALOG.iter().any(|(c, _, _)| *c == code)
}

pub fn is_file_related(code: &str) -> bool {
    FILE_RELATED_CODES.contains(&code)
}

/// The catalog remark for a code.
pub fn remark(code: &str) -> Option<&'static str> {
    CATALOG
        .iter()
        .find(|(c, _, _)| *c == code)
        .map(|(_, r, _)| *r)
}

pub const DEFAULT_MAX_LINE_LENGTH: usize = 79;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub max_line_length: usize,
    /// Code prefixes to report; empty means everything.
    pub select: Vec<String>,
    /// Code prefixes to drop.
    pub ignore: Vec<String>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            max_line_length: DEFAULT_MAX_LINE_LENGTH,
            select: Vec::new(),
            ignore: Vec::new(),
        }
    }
}

impl RuleConfig {
    pub fn is_enabled(&self, code: &str) -> bool {
        code_filter(code, &self.select, &self.ignore)
    }
}

/// Prefix-based select/ignore. An ignore prefix wins over a shorter or equal
/// select prefix.
pub fn code_filter(code: &str, select: &[String], ignore: &[String]) -> bool {
    let best = |list: &[String]| {
        list.iter()
            .filter(|p| code.starts_with(p.as_str()))
            .map(|p| p.len())
            .max()
    };
    let selected = if select.is_empty() {
        Some(0)
    } else {
        best(select)
    };
    match (selected, best(ignore)) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(s), Some(i)) => s > i,
    }
}

/// Runs the enabled style rules over a source. Suppressed lines are taken
/// out before checking, so a blanked magic never counts as a blank line.
/// End-of-text status is kept. Locations are mapped back to cells.
pub fn check_source(src: &PythonSource, rules: &RuleConfig) -> Vec<Diagnostic> {
    let mut kept = String::with_capacity(src.text.len());
    let mut lines = Vec::new();
    for (i, piece) in src.text.split_inclusive('\n').enumerate() {
        if !src.suppressed_lines.contains(&(i + 1)) {
            kept.push_str(piece);
            lines.push(i + 1);
        }
    }
    if !src.trailing_newline
        && src.suppressed_lines.contains(&src.line_count())
        && kept.ends_with('\n')
    {
        kept.pop();
    }
    let mut out: Vec<Diagnostic> = check_text(&kept, rules.max_line_length)
        .into_iter()
        .filter(|f| is_implemented(&f.code) && rules.is_enabled(&f.code))
        .map(|f| {
            let line = lines
                .get(f.line - 1)
                .copied()
                .unwrap_or(src.line_count() + 1);
            let origin = src.origin_of(line);
            let location = Location {
                path: src.origin.clone(),
                cell: origin.map_or(src.cell_index(), |o| o.cell),
                line: origin.map_or(line, |o| o.line),
                column: f.col + 1,
            };
            Diagnostic::new(f.code, f.message, location, Category::Style)
        })
        .collect();
    out.sort_by(|a, b| {
        (a.location.line, a.location.column, &a.code).cmp(&(
            b.location.line,
            b.location.column,
            &b.code,
        ))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RatioError {
    #[error("error ratio is undefined for zero lines of code")]
    ZeroLoc,
}

/// Style findings per line of code. File-related codes are not counted.
pub fn error_ratio(diags: &[Diagnostic], loc: usize) -> Result<f64, RatioError> {
    let n = diags
        .iter()
        .filter(|d| d.category == Category::Style && !is_file_related(&d.code))
        .count();
    ratio_of_counts(n, loc)
}

pub fn ratio_of_counts(findings: usize, loc: usize) -> Result<f64, RatioError> {
    if loc == 0 {
        return Err(RatioError::ZeroLoc);
    }
    Ok(findings as f64 / loc as f64)
}

/// Codes reported for a source, for quick inspection.
pub fn codes_of(diags: &[Diagnostic]) -> BTreeSet<&str> {
    diags.iter().map(|d| d.code.as_str()).collect()
}
