//! Runs every analysis over notebooks and scripts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataflow::{self, analyze_chain, parse_chain_reporting, UnusedConfig};
use crate::deprecation::{
    bundled_ruleset, find_deprecations, imports_package, DeprecationRuleset, DEPRECATED_API,
};
use crate::diagnostic::{analysis_codes, sort_diagnostics, Category, Diagnostic, Location};
use crate::frontend::tokenize::tokenize_text;
use crate::notebook::{
    build_cell_chain, discover_notebooks, read_notebook, CellChain, NormalizationConfig, Notebook,
    NotebookError, ParseOptions, PythonSource,
};
use crate::report::{NotebookMetrics, ScriptMetrics};
use crate::style::{self, check_source, code_filter, RuleConfig};

/// Everything that controls a run.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub rules: RuleConfig,
    pub unused: UnusedConfig,
    pub ruleset: DeprecationRuleset,
    pub normalization: NormalizationConfig,
    pub parse: ParseOptions,
    /// Also analyse `.py` files found next to the notebooks.
    pub include_scripts: bool,
    /// Worker threads; values below 1 are treated as 1.
    pub jobs: usize,
    /// Report end-of-file codes such as `W292` for notebook cells and count
    /// them in ratios.
    pub file_related: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            rules: RuleConfig::default(),
            unused: UnusedConfig::default(),
            ruleset: bundled_ruleset(),
            normalization: NormalizationConfig::default(),
            parse: ParseOptions::default(),
            include_scripts: false,
            jobs: 1,
            file_related: false,
        }
    }
}

impl AnalysisConfig {
    fn keeps(&self, code: &str) -> bool {
        code_filter(code, &self.rules.select, &self.rules.ignore)
    }

    fn unused_config(&self) -> UnusedConfig {
        let named = |code: &str| self.rules.select.iter().any(|s| s == code);
        UnusedConfig {
            policy: self.unused.policy,
            dead_stores: self.unused.dead_stores || named(dataflow::DEAD_STORE),
            unused_imports: self.unused.unused_imports || named(dataflow::UNUSED_IMPORT),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputKind {
    Notebook,
    Script,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input {
    pub path: PathBuf,
    pub kind: InputKind,
}

/// Files to analyse, in a deterministic order, plus `A004` findings for
/// command-line paths that do not exist.
#[derive(Debug, Clone, Default)]
pub struct ResolvedInputs {
    pub inputs: Vec<Input>,
    pub unresolved: Vec<Diagnostic>,
}

fn file_level(path: &Path, code: &str, message: String) -> Diagnostic {
    let location = Location {
        path: path.to_path_buf(),
        cell: None,
        line: 1,
        column: 1,
    };
    Diagnostic::new(code, message, location, Category::Analysis)
}

/// Nearest directory between `start` and `bound` holding a `.git` entry;
/// `bound` itself when there is none.
fn repository_root(start: &Path, bound: &Path) -> PathBuf {
    for dir in start.ancestors() {
        if dir.join(".git").exists() {
            return dir.to_path_buf();
        }
        if dir == bound {
            break;
        }
    }
    bound.to_path_buf()
}

fn scripts_under(root: &Path) -> Vec<PathBuf> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0
                || !(e.file_name().to_string_lossy().starts_with('.')
                    || e.file_name() == "__pycache__")
        })
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
        .map(walkdir::DirEntry::into_path)
        .collect()
}

/// Expands command-line paths. Directories contribute their notebooks;
/// with `include_scripts` each notebook also pulls in the `.py` files of its
/// repository, bounded by the directory that was named.
pub fn resolve_inputs(paths: &[PathBuf], include_scripts: bool) -> ResolvedInputs {
    let mut out = ResolvedInputs::default();
    let mut seen = BTreeSet::new();
    let mut push = |out: &mut ResolvedInputs, path: PathBuf, kind| {
        if seen.insert(path.clone()) {
            out.inputs.push(Input { path, kind });
        }
    };
    for path in paths {
        let (notebooks, bound) = if path.is_dir() {
            (discover_notebooks(path), path.clone())
        } else if path.is_file() {
            if path.extension().is_some_and(|x| x == "py") {
                push(&mut out, path.clone(), InputKind::Script);
                continue;
            }
            let parent = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            (vec![path.clone()], parent.to_path_buf())
        } else {
            out.unresolved.push(file_level(
                path,
                analysis_codes::IO_ERROR,
                "no such file or directory".into(),
            ));
            continue;
        };
        let mut roots = BTreeSet::new();
        for nb in notebooks {
            if include_scripts {
                roots.insert(repository_root(nb.parent().unwrap_or(&bound), &bound));
            }
            push(&mut out, nb, InputKind::Notebook);
        }
        let scripts: BTreeSet<PathBuf> = roots.iter().flat_map(|r| scripts_under(r)).collect();
        for s in scripts {
            push(&mut out, s, InputKind::Script);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metrics {
    Notebook(NotebookMetrics),
    Script(ScriptMetrics),
}

/// Result of analysing one file. `metrics` is absent when the file could
/// not be analysed at all.
#[derive(Debug, Clone, PartialEq)]
pub struct FileAnalysis {
    pub path: PathBuf,
    pub kind: InputKind,
    pub diagnostics: Vec<Diagnostic>,
    pub metrics: Option<Metrics>,
}

impl FileAnalysis {
    /// True when the file was unreadable or not a notebook document.
    pub fn failed_to_load(&self) -> bool {
        self.metrics.is_none()
            && self.diagnostics.iter().any(|d| {
                d.code == analysis_codes::IO_ERROR || d.code == analysis_codes::MALFORMED_NOTEBOOK
            })
    }
}

fn count_by_code(diags: &[Diagnostic]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for d in diags {
        *counts.entry(d.code.clone()).or_insert(0) += 1;
    }
    counts
}

fn tokenize_abort(src: &PythonSource) -> Option<Diagnostic> {
    let tokens = tokenize_text(&src.text);
    if !tokens.aborted {
        return None;
    }
    let err = tokens.errors.last()?;
    let origin = src.origin_of(err.pos.line);
    let location = Location {
        path: src.origin.clone(),
        cell: origin.map_or(src.cell_index(), |o| o.cell),
        line: origin.map_or(err.pos.line, |o| o.line),
        column: err.pos.col + 1,
    };
    let message = format!(
        "tokenizer stopped, later lines not style-checked: {}",
        err.message
    );
    Some(Diagnostic::new(
        analysis_codes::TOKENIZE_ERROR,
        message,
        location,
        Category::Analysis,
    ))
}

struct ChainFindings {
    diagnostics: Vec<Diagnostic>,
    targets: BTreeSet<String>,
    imports_library: bool,
}

/// Style, unused-variable and deprecation passes over one chain. File-related
/// style codes are dropped for notebooks, where a cell is not a file, unless
/// `file_related` is set.
fn analyze_chain_all(chain: &CellChain, cfg: &AnalysisConfig, is_notebook: bool) -> ChainFindings {
    let mut diags = Vec::new();
    for entry in &chain.entries {
        let Some(cell) = &entry.code else { continue };
        if is_notebook {
            if let Some(first) = cell
                .source_lines
                .first()
                .map(|l| l.trim_start())
                .filter(|l| l.starts_with("%%"))
            {
                let magic = first.split_whitespace().next().unwrap_or("%%");
                let location = Location {
                    path: chain.notebook_path.clone(),
                    cell: Some(cell.index_in_document),
                    line: 1,
                    column: 1,
                };
                let message = format!("cell magic {magic}: cell not analysed");
                diags.push(Diagnostic::new(
                    analysis_codes::CELL_MAGIC,
                    message,
                    location,
                    Category::Analysis,
                ));
            }
        }
        diags.extend(
            check_source(&entry.source, &cfg.rules)
                .into_iter()
                .filter(|d| cfg.file_related || !(is_notebook && style::is_file_related(&d.code))),
        );
        diags.extend(tokenize_abort(&entry.source));
    }
    let (asts, syntax) = parse_chain_reporting(chain);
    diags.extend(syntax);
    diags.extend(analyze_chain(chain, &asts, &cfg.unused_config()).diagnostics);
    let findings = find_deprecations(chain, &asts, &cfg.ruleset);
    let targets = findings.iter().map(|f| f.target.clone()).collect();
    diags.extend(findings.iter().map(|f| f.to_diagnostic()));
    let imports_library = cfg
        .ruleset
        .packages()
        .iter()
        .any(|p| imports_package(&asts, p));
    diags.retain(|d| cfg.keeps(&d.code));
    sort_diagnostics(&mut diags);
    ChainFindings {
        diagnostics: diags,
        targets,
        imports_library,
    }
}

/// Analyses a parsed notebook.
pub fn analyze_notebook(nb: &Notebook, cfg: &AnalysisConfig) -> FileAnalysis {
    let chain = build_cell_chain(nb, &cfg.normalization);
    let found = analyze_chain_all(&chain, cfg, true);
    let count = |code: &str| found.diagnostics.iter().filter(|d| d.code == code).count();
    let loc = chain.counts.total_loc;
    let markdown_lines = chain.markdown_lines();
    let metrics = NotebookMetrics {
        path: nb.path.clone(),
        loc,
        n_code_cells: chain.counts.n_code_cells,
        n_markdown_cells: chain.counts.n_markdown_cells,
        markdown_lines,
        diagnostics_by_code: count_by_code(&found.diagnostics),
        n_unused: count(dataflow::UNUSED_VARIABLE),
        n_deprecated: count(DEPRECATED_API),
        text_code_ratio: (loc > 0).then(|| markdown_lines as f64 / loc as f64),
        deprecated_targets: found.targets,
        imports_library: found.imports_library,
    };
    FileAnalysis {
        path: nb.path.clone(),
        kind: InputKind::Notebook,
        diagnostics: found.diagnostics,
        metrics: Some(Metrics::Notebook(metrics)),
    }
}

/// Reads and analyses one notebook file. Load failures become `A00x`
/// diagnostics.
pub fn analyze_notebook_file(path: &Path, cfg: &AnalysisConfig) -> FileAnalysis {
    match read_notebook(path, &cfg.parse) {
        Ok(nb) => analyze_notebook(&nb, cfg),
        Err(err) => {
            let code = match err {
                NotebookError::MalformedDocument(_) | NotebookError::UnsupportedVersion(_) => {
                    analysis_codes::MALFORMED_NOTEBOOK
                }
                NotebookError::NonPythonNotebook(_) => analysis_codes::NON_PYTHON,
                NotebookError::Io { .. } => analysis_codes::IO_ERROR,
            };
            let message = match &err {
                NotebookError::Io { source, .. } => format!("cannot read file: {source}"),
                NotebookError::NonPythonNotebook(_) => format!("{err}; notebook skipped"),
                _ => err.to_string(),
            };
            let diagnostics = vec![file_level(path, code, message)]
                .into_iter()
                .filter(|d| cfg.keeps(&d.code))
                .collect();
            FileAnalysis {
                path: path.to_path_buf(),
                kind: InputKind::Notebook,
                diagnostics,
                metrics: None,
            }
        }
    }
}

/// Analyses script text. Scripts keep every style code, `W292` included.
pub fn analyze_script(path: &Path, text: &str, cfg: &AnalysisConfig) -> FileAnalysis {
    let source = PythonSource::from_script(path, text);
    let loc = source.loc();
    let found = analyze_chain_all(&CellChain::from_script(source), cfg, false);
    let metrics = ScriptMetrics {
        path: path.to_path_buf(),
        loc,
        diagnostics_by_code: count_by_code(&found.diagnostics),
    };
    FileAnalysis {
        path: path.to_path_buf(),
        kind: InputKind::Script,
        diagnostics: found.diagnostics,
        metrics: Some(Metrics::Script(metrics)),
    }
}

pub fn analyze_script_file(path: &Path, cfg: &AnalysisConfig) -> FileAnalysis {
    match fs::read(path) {
        Ok(bytes) => analyze_script(path, &String::from_utf8_lossy(&bytes), cfg),
        Err(e) => FileAnalysis {
            path: path.to_path_buf(),
            kind: InputKind::Script,
            diagnostics: vec![file_level(
                path,
                analysis_codes::IO_ERROR,
                format!("cannot read file: {e}"),
            )],
            metrics: None,
        },
    }
}

pub fn analyze_input(input: &Input, cfg: &AnalysisConfig) -> FileAnalysis {
    match input.kind {
        InputKind::Notebook => analyze_notebook_file(&input.path, cfg),
        InputKind::Script => analyze_script_file(&input.path, cfg),
    }
}

/// Analyses inputs on `cfg.jobs` threads. Results come back in input order.
pub fn analyze_inputs(inputs: &[Input], cfg: &AnalysisConfig) -> Vec<FileAnalysis> {
    let jobs = cfg.jobs.max(1);
    if jobs == 1 {
        return inputs.iter().map(|i| analyze_input(i, cfg)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| inputs.par_iter().map(|i| analyze_input(i, cfg)).collect()),
        Err(_) => inputs.iter().map(|i| analyze_input(i, cfg)).collect(),
    }
}
