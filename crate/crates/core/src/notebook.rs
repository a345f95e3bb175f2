//! Notebook documents, the cell chain, and sibling script discovery.
//!
//! A notebook is parsed into [`Notebook`], then flattened into a
//! [`CellChain`]: the code cells in document order, each carrying the
//! markdown that explains it and a normalized [`PythonSource`] in which
//! IPython-only lines have been blanked out. Normalization never changes
//! the number of lines, so every analysis position maps straight back to a
//! `(cell, line)` in the original document.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;
use walkdir::WalkDir;

#[derive(Debug, Error)]
pub enum NotebookError {
    #[error("malformed notebook document: {0}")]
    MalformedDocument(String),
    #[error("unsupported nbformat major version {0} (expected 3 or 4)")]
    UnsupportedVersion(i64),
    #[error("notebook kernel language is {0:?}, not Python")]
    NonPythonNotebook(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Code,
    Markdown,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellKind,
    /// Source split into lines, without line terminators or carriage returns.
    pub source_lines: Vec<String>,
    /// Whether the stored source ended with a newline.
    pub trailing_newline: bool,
    pub execution_count: Option<u64>,
    pub index_in_document: usize,
    /// Number of stored outputs. Counted, never analyzed.
    pub n_outputs: usize,
}

impl Cell {
    pub fn code(index: usize, lines: &[&str]) -> Cell {
        Cell {
            kind: CellKind::Code,
            source_lines: lines.iter().map(|s| s.to_string()).collect(),
            trailing_newline: false,
            execution_count: None,
            index_in_document: index,
            n_outputs: 0,
        }
    }

    pub fn markdown(index: usize, lines: &[&str]) -> Cell {
        Cell {
            kind: CellKind::Markdown,
            ..Cell::code(index, lines)
        }
    }

    pub fn non_blank_lines(&self) -> usize {
        self.source_lines
            .iter()
            .filter(|l| !l.trim().is_empty())
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Notebook {
    pub path: PathBuf,
    pub format_version: (u32, u32),
    pub cells: Vec<Cell>,
    pub metadata_language: String,
}

impl Notebook {
    /// An nbformat 4 notebook made of code cells with the given sources.
    pub fn from_code_cells<S: AsRef<str>>(path: impl Into<PathBuf>, sources: &[S]) -> Notebook {
        let cells = sources
            .iter()
            .enumerate()
            .map(|(i, src)| {
                let src = src.as_ref();
                let body = src.strip_suffix('\n').unwrap_or(src);
                let lines: Vec<&str> = if src.is_empty() {
                    Vec::new()
                } else {
                    body.split('\n').collect()
                };
                Cell {
                    trailing_newline: src.ends_with('\n'),
                    ..Cell::code(i, &lines)
                }
            })
            .collect();
        Notebook {
            path: path.into(),
            format_version: (4, 5),
            cells,
            metadata_language: "python".to_string(),
        }
    }
}

/// Options for [`parse_notebook`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Parse notebooks whose metadata declares a non-Python kernel anyway.
    pub allow_non_python: bool,
}

/// Parses a notebook document (nbformat 3 or 4, JSON, UTF-8).
pub fn parse_notebook(bytes: &[u8], opts: &ParseOptions) -> Result<Notebook, NotebookError> {
    let doc: Value = serde_json::from_slice(bytes)
        .map_err(|e| NotebookError::MalformedDocument(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| NotebookError::MalformedDocument("top level is not an object".into()))?;
    let major = obj.get("nbformat").and_then(Value::as_i64).ok_or_else(|| {
        NotebookError::MalformedDocument("missing integer field `nbformat`".into())
    })?;
    let minor = obj
        .get("nbformat_minor")
        .and_then(Value::as_i64)
        .unwrap_or(0);
    let raw_cells = match major {
        4 => obj
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| NotebookError::MalformedDocument("missing array field `cells`".into()))?
            .iter()
            .collect::<Vec<_>>(),
        3 => {
            let sheets = obj
                .get("worksheets")
                .and_then(Value::as_array)
                .ok_or_else(|| {
                    NotebookError::MalformedDocument("missing array field `worksheets`".into())
                })?;
            let mut cells = Vec::new();
            for sheet in sheets {
                let sheet_cells =
                    sheet
                        .get("cells")
                        .and_then(Value::as_array)
                        .ok_or_else(|| {
                            NotebookError::MalformedDocument(
                                "worksheet without `cells` array".into(),
                            )
                        })?;
                cells.extend(sheet_cells.iter());
            }
            cells
        }
        other => return Err(NotebookError::UnsupportedVersion(other)),
    };

    let metadata = obj.get("metadata");
    let language = declared_language(metadata, &raw_cells).unwrap_or_else(|| "python".to_string());
    if !is_python_language(&language) && !opts.allow_non_python {
        return Err(NotebookError::NonPythonNotebook(language));
    }

    let mut cells = Vec::with_capacity(raw_cells.len());
    for (index, raw) in raw_cells.into_iter().enumerate() {
        cells.push(parse_cell(raw, index, major)?);
    }
    Ok(Notebook {
        path: PathBuf::new(),
        format_version: (major as u32, minor.max(0) as u32),
        cells,
        metadata_language: language,
    })
}

/// Reads and parses a notebook file, recording its path.
pub fn read_notebook(path: &Path, opts: &ParseOptions) -> Result<Notebook, NotebookError> {
    let bytes = fs::read(path).map_err(|source| NotebookError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut nb = parse_notebook(&bytes, opts)?;
    nb.path = path.to_path_buf();
    Ok(nb)
}

fn declared_language(metadata: Option<&Value>, cells: &[&Value]) -> Option<String> {
    let meta = metadata?;
    let from_meta = meta
        .pointer("/kernelspec/language")
        .or_else(|| meta.pointer("/language_info/name"))
        .or_else(|| meta.get("language"))
        .and_then(Value::as_str);
    if let Some(lang) = from_meta {
        return Some(lang.to_string());
    }
    // v3 records the language on each code cell.
    cells
        .iter()
        .filter(|c| c.get("cell_type").and_then(Value::as_str) == Some("code"))
        .find_map(|c| c.get("language").and_then(Value::as_str))
        .map(str::to_string)
}

fn is_python_language(lang: &str) -> bool {
    let lang = lang.to_ascii_lowercase();
    lang.starts_with("python") || lang == "ipython" || lang.starts_with("ipython")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SourceField {
    Text(String),
    Lines(Vec<String>),
}

fn parse_cell(raw: &Value, index: usize, major: i64) -> Result<Cell, NotebookError> {
    let bad = |what: &str| NotebookError::MalformedDocument(format!("cell {index}: {what}"));
    let cell_type = raw
        .get("cell_type")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing `cell_type`"))?;
    let (kind, prefix) = match (cell_type, major) {
        ("code", _) => (CellKind::Code, String::new()),
        ("markdown", _) => (CellKind::Markdown, String::new()),
        ("raw", _) => (CellKind::Raw, String::new()),
        ("heading", 3) => {
            let level = raw
                .get("level")
                .and_then(Value::as_u64)
                .unwrap_or(1)
                .clamp(1, 6) as usize;
            (CellKind::Markdown, format!("{} ", "#".repeat(level)))
        }
        (other, _) => return Err(bad(&format!("unknown cell_type {other:?}"))),
    };
    let source_key = if major == 3 && kind == CellKind::Code {
        "input"
    } else {
        "source"
    };
    let source = match raw.get(source_key) {
        None | Some(Value::Null) => SourceField::Text(String::new()),
        Some(v) => SourceField::deserialize(v).map_err(|_| {
            bad(&format!(
                "`{source_key}` is not a string or list of strings"
            ))
        })?,
    };
    let mut text = match source {
        SourceField::Text(t) => t,
        SourceField::Lines(lines) => lines.concat(),
    };
    if !prefix.is_empty() {
        text.insert_str(0, &prefix);
    }
    let (source_lines, trailing_newline) = split_source(&text);
    let count_key = if major == 3 {
        "prompt_number"
    } else {
        "execution_count"
    };
    let execution_count = if kind == CellKind::Code {
        raw.get(count_key).and_then(Value::as_u64)
    } else {
        None
    };
    let n_outputs = raw
        .get("outputs")
        .and_then(Value::as_array)
        .map_or(0, Vec::len);
    Ok(Cell {
        kind,
        source_lines,
        trailing_newline,
        execution_count,
        index_in_document: index,
        n_outputs,
    })
}

/// Normalizes line endings and splits into lines; a single trailing newline
/// is recorded rather than producing an empty final line.
fn split_source(text: &str) -> (Vec<String>, bool) {
    let text = text.replace("\r\n", "\n").replace('\r', "\n");
    if text.is_empty() {
        return (Vec::new(), false);
    }
    let (body, trailing) = match text.strip_suffix('\n') {
        Some(body) => (body, true),
        None => (text.as_str(), false),
    };
    (body.split('\n').map(str::to_string).collect(), trailing)
}

/// Where a line of analyzed source came from. `line` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LineOrigin {
    pub cell: Option<usize>,
    pub line: usize,
}

/// Python text handed to the analyses, with a map back to the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PythonSource {
    /// Notebook or script path the text came from.
    pub origin: PathBuf,
    pub text: String,
    /// `line_map[i]` is the origin of line `i + 1` of `text`.
    pub line_map: Vec<LineOrigin>,
    /// 1-based line numbers blanked out during normalization.
    pub suppressed_lines: BTreeSet<usize>,
    /// The original text ended with a newline. Normalization may add one.
    pub trailing_newline: bool,
}

impl PythonSource {
    /// Wraps plain script text with an identity line map.
    pub fn from_script(origin: impl Into<PathBuf>, text: &str) -> PythonSource {
        let text = text.replace("\r\n", "\n").replace('\r', "\n");
        let n = text.lines().count();
        PythonSource {
            trailing_newline: text.ends_with('\n'),
            origin: origin.into(),
            line_map: (1..=n)
                .map(|line| LineOrigin { cell: None, line })
                .collect(),
            text,
            suppressed_lines: BTreeSet::new(),
        }
    }

    pub fn line_count(&self) -> usize {
        self.text.lines().count()
    }

    /// Lines of code: non-blank lines of the normalized text.
    pub fn loc(&self) -> usize {
        self.text.lines().filter(|l| !l.trim().is_empty()).count()
    }

    pub fn origin_of(&self, line: usize) -> Option<LineOrigin> {
        line.checked_sub(1)
            .and_then(|i| self.line_map.get(i))
            .copied()
    }

    pub fn cell_index(&self) -> Option<usize> {
        self.line_map.first().and_then(|o| o.cell)
    }
}

#[derive(Debug, Clone, Default)]
pub struct NormalizationConfig {
    /// Leave `name = %magic` and `name = !cmd` lines untouched. They are
    /// blanked by default; kept, they surface as syntax errors.
    pub keep_assignment_magics: bool,
}

/// Blanks IPython-only syntax in a code cell while keeping the line count.
pub fn normalize_cell_source(
    cell: &Cell,
    origin: &Path,
    cfg: &NormalizationConfig,
) -> PythonSource {
    let mut suppressed = BTreeSet::new();
    let cell_magic = cell
        .source_lines
        .first()
        .is_some_and(|l| l.trim_start().starts_with("%%"));
    let mut lines: Vec<&str> = Vec::with_capacity(cell.source_lines.len());
    for (i, line) in cell.source_lines.iter().enumerate() {
        if cell_magic || is_ipython_line(line, cfg) {
            suppressed.insert(i + 1);
            lines.push("");
        } else {
            lines.push(line);
        }
    }
    let mut text = lines.join("\n");
    if let Some(last) = lines.last() {
        // A blank last line would otherwise vanish from the line count.
        if cell.trailing_newline || last.is_empty() {
            text.push('\n');
        }
    }
    PythonSource {
        origin: origin.to_path_buf(),
        line_map: (1..=lines.len())
            .map(|line| LineOrigin {
                cell: Some(cell.index_in_document),
                line,
            })
            .collect(),
        text,
        suppressed_lines: suppressed,
        trailing_newline: cell.trailing_newline,
    }
}

fn is_ipython_line(line: &str, cfg: &NormalizationConfig) -> bool {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return false;
    }
    if trimmed.starts_with('%') || trimmed.starts_with('!') {
        return true;
    }
    if let Some(rest) = trimmed.strip_prefix('?') {
        return is_help_target(rest.trim_start_matches('?'));
    }
    if let Some(rest) = trimmed.strip_suffix('?') {
        return is_help_target(rest.trim_end_matches('?').trim_end());
    }
    !cfg.keep_assignment_magics && is_assignment_magic(trimmed)
}

fn is_help_target(text: &str) -> bool {
    let text = text.trim();
    let text = text.strip_suffix("()").unwrap_or(text);
    match text.chars().next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '*' => {}
        _ => return false,
    }
    text.chars()
        .all(|c| c.is_alphanumeric() || c == '_' || c == '.' || c == '*')
}

fn is_assignment_magic(line: &str) -> bool {
    let Some(eq) = line.find('=') else {
        return false;
    };
    let (lhs, rhs) = (&line[..eq], &line[eq + 1..]);
    if rhs.starts_with('=') {
        return false;
    }
    let rhs = rhs.trim_start();
    if !(rhs.starts_with('%') || rhs.starts_with('!')) {
        return false;
    }
    !lhs.trim().is_empty()
        && lhs.split(',').all(|name| {
            let name = name.trim();
            let mut chars = name.chars();
            matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
                && chars.all(|c| c.is_alphanumeric() || c == '_')
        })
}

/// One code cell of the chain with its explanatory markdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEntry {
    /// `None` only for the synthetic entry of a notebook without code cells.
    pub code: Option<Cell>,
    pub preceding_markdown: Vec<Cell>,
    /// Markdown after the last code cell, attached to the last entry.
    pub trailing_markdown: Vec<Cell>,
    pub source: PythonSource,
}

impl ChainEntry {
    pub fn cell_index(&self) -> Option<usize> {
        self.code.as_ref().map(|c| c.index_in_document)
    }

    pub fn markdown(&self) -> impl Iterator<Item = &Cell> {
        self.preceding_markdown
            .iter()
            .chain(self.trailing_markdown.iter())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainCounts {
    pub n_code_cells: usize,
    pub n_markdown_cells: usize,
    pub n_raw_cells: usize,
    pub total_loc: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellChain {
    pub notebook_path: PathBuf,
    pub entries: Vec<ChainEntry>,
    pub counts: ChainCounts,
}

impl CellChain {
    /// Wraps a plain script as a one-entry chain so the AST analyses can run
    /// on it. Locations keep `cell: None`.
    pub fn from_script(source: PythonSource) -> CellChain {
        let lines: Vec<&str> = source.text.split('\n').collect();
        let counts = ChainCounts {
            n_code_cells: 1,
            total_loc: source.loc(),
            ..ChainCounts::default()
        };
        let entry = ChainEntry {
            code: Some(Cell::code(0, &lines)),
            preceding_markdown: Vec::new(),
            trailing_markdown: Vec::new(),
            source: source.clone(),
        };
        CellChain {
            notebook_path: source.origin,
            entries: vec![entry],
            counts,
        }
    }

    /// Non-blank markdown lines across the whole notebook.
    pub fn markdown_lines(&self) -> usize {
        self.entries
            .iter()
            .flat_map(ChainEntry::markdown)
            .map(Cell::non_blank_lines)
            .sum()
    }
}

/// Flattens a notebook into its chain of code cells, in document order.
pub fn build_cell_chain(nb: &Notebook, cfg: &NormalizationConfig) -> CellChain {
    let mut entries: Vec<ChainEntry> = Vec::new();
    let mut pending: Vec<Cell> = Vec::new();
    let mut counts = ChainCounts::default();
    for cell in &nb.cells {
        match cell.kind {
            CellKind::Markdown => {
                counts.n_markdown_cells += 1;
                pending.push(cell.clone());
            }
            CellKind::Raw => counts.n_raw_cells += 1,
            CellKind::Code => {
                counts.n_code_cells += 1;
                let source = normalize_cell_source(cell, &nb.path, cfg);
                counts.total_loc += source.loc();
                entries.push(ChainEntry {
                    code: Some(cell.clone()),
                    preceding_markdown: std::mem::take(&mut pending),
                    trailing_markdown: Vec::new(),
                    source,
                });
            }
        }
    }
    if !pending.is_empty() {
        match entries.last_mut() {
            Some(last) => last.trailing_markdown = pending,
            None => entries.push(ChainEntry {
                code: None,
                preceding_markdown: pending,
                trailing_markdown: Vec::new(),
                source: PythonSource {
                    origin: nb.path.clone(),
                    text: String::new(),
                    line_map: Vec::new(),
                    suppressed_lines: BTreeSet::new(),
                    trailing_newline: false,
                },
            }),
        }
    }
    CellChain {
        notebook_path: nb.path.clone(),
        entries,
        counts,
    }
}

/// A standalone Python file living next to a notebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalScript {
    pub path: PathBuf,
    pub source: PythonSource,
    pub loc: usize,
}

/// A file that could not be read during discovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoveryWarning {
    pub path: PathBuf,
    pub message: String,
}

fn is_hidden(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0
        && entry
            .file_name()
            .to_str()
            .is_some_and(|s| s.starts_with('.'))
}

fn files_with_extension(root: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| !is_hidden(e) && e.file_name() != "__pycache__")
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == ext))
        .map(|e| e.into_path())
        .collect();
    out.sort();
    out
}

/// Collects `.py` files under `root`, skipping hidden directories and
/// notebook checkpoints. Unreadable files become warnings.
pub fn discover_external_scripts(root: &Path) -> (Vec<ExternalScript>, Vec<DiscoveryWarning>) {
    let mut scripts = Vec::new();
    let mut warnings = Vec::new();
    for path in files_with_extension(root, "py") {
        match fs::read(&path) {
            Ok(bytes) => {
                let text = String::from_utf8_lossy(&bytes);
                let source = PythonSource::from_script(&path, &text);
                let loc = source.loc();
                scripts.push(ExternalScript { path, source, loc });
            }
            Err(e) => warnings.push(DiscoveryWarning {
                path,
                message: e.to_string(),
            }),
        }
    }
    (scripts, warnings)
}

/// Collects `.ipynb` files under `root` with the same exclusions.
pub fn discover_notebooks(root: &Path) -> Vec<PathBuf> {
    files_with_extension(root, "ipynb")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v4(cells: &str) -> Vec<u8> {
        format!(
            r#"{{"nbformat": 4, "nbformat_minor": 2,
                "metadata": {{"kernelspec": {{"language": "python", "name": "python3"}}}},
                "cells": [{cells}]}}"#
        )
        .into_bytes()
    }

    fn parse(bytes: &[u8]) -> Notebook {
        parse_notebook(bytes, &ParseOptions::default()).unwrap()
    }

    #[test]
    fn minimal_code_cell() {
        let nb = parse(&v4(
            r#"{"cell_type": "code", "source": ["x = 1\n"], "execution_count": 1, "outputs": []}"#,
        ));
        assert_eq!(nb.cells.len(), 1);
        assert_eq!(nb.cells[0].kind, CellKind::Code);
        assert_eq!(nb.cells[0].source_lines, vec!["x = 1"]);
        assert_eq!(nb.cells[0].execution_count, Some(1));
        assert_eq!(nb.format_version, (4, 2));
    }

    #[test]
    fn document_order_preserved() {
        let nb = parse(&v4(r#"{"cell_type": "markdown", "source": "a"},
               {"cell_type": "code", "source": "x"},
               {"cell_type": "markdown", "source": "b"},
               {"cell_type": "code", "source": "y"}"#));
        let kinds: Vec<_> = nb.cells.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            [
                CellKind::Markdown,
                CellKind::Code,
                CellKind::Markdown,
                CellKind::Code
            ]
        );
        let idx: Vec<_> = nb.cells.iter().map(|c| c.index_in_document).collect();
        assert_eq!(idx, [0, 1, 2, 3]);
    }

    #[test]
    fn truncated_document_is_malformed() {
        let bytes = v4(r#"{"cell_type": "code", "source": "x"}"#);
        let err = parse_notebook(&bytes[..bytes.len() / 2], &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, NotebookError::MalformedDocument(_)));
    }

    #[test]
    fn unsupported_major_version() {
        let err = parse_notebook(br#"{"nbformat": 2, "cells": []}"#, &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, NotebookError::UnsupportedVersion(2)));
    }

    #[test]
    fn non_python_kernel_rejected_unless_forced() {
        let doc = br#"{"nbformat": 4, "nbformat_minor": 0,
            "metadata": {"kernelspec": {"language": "R"}}, "cells": []}"#;
        assert!(matches!(
            parse_notebook(doc, &ParseOptions::default()),
            Err(NotebookError::NonPythonNotebook(l)) if l == "R"
        ));
        let nb = parse_notebook(
            doc,
            &ParseOptions {
                allow_non_python: true,
            },
        )
        .unwrap();
        assert_eq!(nb.metadata_language, "R");
    }

    #[test]
    fn v3_worksheets_flattened() {
        let doc = br##"{"nbformat": 3, "nbformat_minor": 0, "metadata": {"name": "t"},
            "worksheets": [
              {"cells": [{"cell_type": "heading", "level": 2, "source": ["Title"]},
                         {"cell_type": "code", "language": "python", "input": ["a = 1\n", "b = 2"],
                          "prompt_number": 3, "outputs": [{}]}]},
              {"cells": [{"cell_type": "markdown", "source": "end"}]}]}"##;
        let nb = parse(doc);
        assert_eq!(nb.cells.len(), 3);
        assert_eq!(nb.cells[0].kind, CellKind::Markdown);
        assert_eq!(nb.cells[0].source_lines, vec!["## Title"]);
        assert_eq!(nb.cells[1].source_lines, vec!["a = 1", "b = 2"]);
        assert_eq!(nb.cells[1].execution_count, Some(3));
        assert_eq!(nb.cells[1].n_outputs, 1);
        assert_eq!(nb.cells[2].index_in_document, 2);
    }

    #[test]
    fn carriage_returns_removed() {
        let nb = parse(&v4(
            r#"{"cell_type": "code", "source": "a = 1\r\nb = 2\rc = 3"}"#,
        ));
        assert_eq!(nb.cells[0].source_lines, vec!["a = 1", "b = 2", "c = 3"]);
    }

    #[test]
    fn markdown_attachment() {
        let nb = Notebook {
            path: "n.ipynb".into(),
            format_version: (4, 0),
            cells: vec![
                Cell::markdown(0, &["A"]),
                Cell::code(1, &["x = 1"]),
                Cell::code(2, &["y = 2"]),
                Cell::markdown(3, &["B"]),
            ],
            metadata_language: "python".into(),
        };
        let chain = build_cell_chain(&nb, &NormalizationConfig::default());
        assert_eq!(chain.entries.len(), 2);
        assert_eq!(
            chain.entries[0].preceding_markdown,
            vec![nb.cells[0].clone()]
        );
        assert!(chain.entries[1].preceding_markdown.is_empty());
        assert_eq!(
            chain.entries[1].trailing_markdown,
            vec![nb.cells[3].clone()]
        );
    }

    #[test]
    fn markdown_only_notebook_gets_synthetic_entry() {
        let nb = Notebook {
            path: "n.ipynb".into(),
            format_version: (4, 0),
            cells: vec![Cell::markdown(0, &["A"]), Cell::markdown(1, &["B"])],
            metadata_language: "python".into(),
        };
        let chain = build_cell_chain(&nb, &NormalizationConfig::default());
        assert_eq!(chain.entries.len(), 1);
        assert!(chain.entries[0].code.is_none());
        assert_eq!(chain.entries[0].preceding_markdown.len(), 2);
        assert_eq!(chain.counts.total_loc, 0);
    }

    #[test]
    fn total_loc_sums_non_blank_lines() {
        let nb = Notebook {
            path: "n.ipynb".into(),
            format_version: (4, 0),
            cells: vec![
                Cell::code(0, &["a = 1", "", "b = 2"]),
                Cell::code(1, &[]),
                Cell::code(2, &["c", "d", "e", "  ", "f", "g"]),
            ],
            metadata_language: "python".into(),
        };
        let chain = build_cell_chain(&nb, &NormalizationConfig::default());
        assert_eq!(chain.counts.total_loc, 7);
        assert_eq!(chain.counts.n_code_cells, 3);
    }

    fn norm(lines: &[&str]) -> PythonSource {
        normalize_cell_source(
            &Cell::code(0, lines),
            Path::new("n.ipynb"),
            &NormalizationConfig::default(),
        )
    }

    #[test]
    fn line_magic_blanked() {
        let src = norm(&["%matplotlib inline", "x = 1"]);
        assert_eq!(src.text, "\nx = 1");
        assert_eq!(src.suppressed_lines, BTreeSet::from([1]));
        assert_eq!(src.line_count(), src.line_map.len());
    }

    #[test]
    fn cell_magic_suppresses_everything() {
        let src = norm(&["%%bash", "ls"]);
        assert_eq!(src.text, "\n\n");
        assert_eq!(src.suppressed_lines, BTreeSet::from([1, 2]));
        assert_eq!(src.line_count(), 2);
    }

    #[test]
    fn plain_code_unchanged() {
        let src = norm(&["x = 1"]);
        assert_eq!(src.text, "x = 1");
        assert!(src.suppressed_lines.is_empty());
    }

    #[test]
    fn shell_help_and_assignment_magics() {
        let src = norm(&[
            "!pip install x",
            "np.array?",
            "??len",
            "files = !ls",
            "a = b != c",
            "x = 1 if y else 2",
        ]);
        assert_eq!(src.suppressed_lines, BTreeSet::from([1, 2, 3, 4]));
        let src = norm(&["print('what?')"]);
        assert!(src.suppressed_lines.is_empty());
    }

    #[test]
    fn blank_final_line_keeps_line_count() {
        let mut cell = Cell::code(0, &["x = 1", ""]);
        cell.trailing_newline = false;
        let src = normalize_cell_source(&cell, Path::new("n"), &NormalizationConfig::default());
        assert_eq!(src.line_count(), 2);
        assert_eq!(src.line_map.len(), 2);
    }

    #[test]
    fn discovery_filters() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::write(root.join("a.ipynb"), "{}").unwrap();
        fs::write(root.join("util.py"), "x = 1\n\ny = 2\n").unwrap();
        fs::create_dir_all(root.join(".git")).unwrap();
        fs::write(root.join(".git/x.py"), "").unwrap();
        fs::create_dir_all(root.join("lib")).unwrap();
        fs::write(root.join("lib/helpers.py"), "").unwrap();
        fs::write(root.join("lib/data.csv"), "").unwrap();
        fs::create_dir_all(root.join(".ipynb_checkpoints")).unwrap();
        fs::write(root.join(".ipynb_checkpoints/util-checkpoint.py"), "").unwrap();
        let (scripts, warnings) = discover_external_scripts(root);
        let names: Vec<_> = scripts
            .iter()
            .map(|s| s.path.strip_prefix(root).unwrap().to_path_buf())
            .collect();
        assert_eq!(
            names,
            vec![PathBuf::from("lib/helpers.py"), PathBuf::from("util.py")]
        );
        assert!(warnings.is_empty());
        assert_eq!(scripts[1].loc, 2);
        assert_eq!(discover_notebooks(root), vec![root.join("a.ipynb")]);
    }

    #[test]
    fn discovery_of_empty_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover_external_scripts(dir.path()).0.is_empty());
    }
}
