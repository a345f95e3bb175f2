//! Findings reported by every analysis pass.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Which analysis produced a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Style,
    Unused,
    Deprecated,
    Analysis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    /// `W` codes and every non-style category are warnings; the rest are errors.
    pub fn for_code(code: &str, category: Category) -> Severity {
        if code.starts_with('W') || category != Category::Style {
            Severity::Warning
        } else {
            Severity::Error
        }
    }
}

/// Position of a finding. `line` and `column` are 1-based; `cell` is the
/// document index of the notebook cell, absent for plain scripts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub path: PathBuf,
    pub cell: Option<usize>,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    pub location: Location,
    pub category: Category,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn new(
        code: impl Into<String>,
        message: impl Into<String>,
        location: Location,
        category: Category,
    ) -> Self {
        let code = code.into();
        let severity = Severity::for_code(&code, category);
        Diagnostic {
            code,
            message: message.into(),
            location,
            category,
            severity,
        }
    }

    /// Ordering used for printing: cell, line, column, code.
    pub fn sort_key(&self) -> (Option<usize>, usize, usize, &str) {
        (
            self.location.cell,
            self.location.line,
            self.location.column,
            &self.code,
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc = &self.location;
        match loc.cell {
            Some(cell) => write!(
                f,
                "{}[cell {}]:{}:{}: {} {}",
                loc.path.display(),
                cell,
                loc.line,
                loc.column,
                self.code,
                self.message
            ),
            None => write!(
                f,
                "{}:{}:{}: {} {}",
                loc.path.display(),
                loc.line,
                loc.column,
                self.code,
                self.message
            ),
        }
    }
}

/// Sorts diagnostics into their canonical print order.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then_with(|| a.message.cmp(&b.message))
    });
}

/// Codes used for analysis-category findings.
pub mod analysis_codes {
    /// The notebook document could not be parsed.
    pub const MALFORMED_NOTEBOOK: &str = "A001";
    /// A code cell failed to parse; AST-based analyses skip it.
    pub const SYNTAX_ERROR: &str = "A002";
    /// A cell magic suppressed the whole cell.
    pub const CELL_MAGIC: &str = "A003";
    /// The file could not be read.
    pub const IO_ERROR: &str = "A004";
    /// The notebook declares a non-Python kernel.
    pub const NON_PYTHON: &str = "A005";
    /// The tokenizer gave up part-way; logical-line style checks are partial.
    pub const TOKENIZE_ERROR: &str = "A006";
}
