//! The `nblint` command line: `lint`, `report` and `rules`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataflow::{UnusedConfig, UnusedPolicy};
use crate::deprecation::{
    bundled_ruleset, load_ruleset, load_ruleset_dir, DeprecationRuleset, RulesetError,
};
use crate::diagnostic::Diagnostic;
use crate::notebook::{NormalizationConfig, ParseOptions};
use crate::pipeline::{analyze_inputs, resolve_inputs, AnalysisConfig, FileAnalysis};
use crate::report::{analyze_corpus, render, Format};
use crate::style::{rule_catalog, RuleConfig, DEFAULT_MAX_LINE_LENGTH};

pub const CONFIG_FILE: &str = "nblint.toml";

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Codes outside the style catalog, for `nblint rules`.
pub const OTHER_CODES: [(&str, &str); 10] = [
    ("U001", "variable assigned but never used"),
    ("U002", "value assigned is never read (off by default)"),
    ("U003", "import never used (off by default)"),
    ("D001", "use of a deprecated library API"),
    ("A001", "malformed notebook document"),
    ("A002", "syntax error, cell skipped by AST analyses"),
    ("A003", "cell magic, cell not analysed"),
    ("A004", "file could not be read"),
    ("A005", "notebook kernel is not Python"),
    ("A006", "tokenizer stopped early, style checks partial"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "nblint",
    version,
    about = "Style, unused-variable and deprecated-API checks for Jupyter notebooks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print diagnostics for notebooks and scripts.
    Lint(RunArgs),
    /// Print corpus-level metrics.
    Report(RunArgs),
    /// List style codes and deprecation rules.
    Rules(Flags),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Notebooks, scripts or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, value_name = "N")]
    pub max_line_length: Option<usize>,
    /// Also report underscore names, parameters, imports and exported names.
    #[arg(long)]
    pub strict_unused: bool,
    /// Extra deprecation ruleset file or directory, appended to the bundled one.
    #[arg(long, value_name = "PATH")]
    pub ruleset: Vec<PathBuf>,
    /// Also analyse .py files in each notebook's repository.
    #[arg(long)]
    pub include_scripts: bool,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Comma-separated code prefixes to report.
    #[arg(long, value_name = "CODES", value_delimiter = ',')]
    pub select: Vec<String>,
    /// Comma-separated code prefixes to drop.
    #[arg(long, value_name = "CODES", value_delimiter = ',')]
    pub ignore: Vec<String>,
    /// Report W292 for notebook cells and count it in ratios.
    #[arg(long)]
    pub file_related: bool,
    /// Read settings from this file instead of searching for nblint.toml.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Contents of `nblint.toml`. Relative ruleset paths are resolved against
/// the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub format: Option<OutputFormat>,
    pub max_line_length: Option<usize>,
    pub strict_unused: Option<bool>,
    pub dead_stores: Option<bool>,
    pub unused_imports: Option<bool>,
    pub rulesets: Vec<PathBuf>,
    pub include_scripts: Option<bool>,
    pub jobs: Option<usize>,
    pub select: Vec<String>,
    pub ignore: Vec<String>,
    pub file_related: Option<bool>,
    pub keep_assignment_magics: Option<bool>,
    pub allow_non_python: Option<bool>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Ruleset(#[from] RulesetError),
}

/// Settings for one run after merging the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub format: OutputFormat,
    pub rules: RuleConfig,
    pub unused: UnusedConfig,
    pub rulesets: Vec<PathBuf>,
    pub include_scripts: bool,
    pub jobs: usize,
    pub file_related: bool,
    pub keep_assignment_magics: bool,
    pub allow_non_python: bool,
}

/// Walks up from `start` to the first `nblint.toml`, stopping at a
/// repository root.
pub fn find_config(start: &Path) -> Option<PathBuf> {
    for dir in start.ancestors() {
        let candidate = dir.join(CONFIG_FILE);
        if candidate.is_file() {
            return Some(candidate);
        }
        if dir.join(".git").exists() {
            break;
        }
    }
    None
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.rulesets = cfg.rulesets.iter().map(|p| base.join(p)).collect();
    Ok(cfg)
}

impl RunConfig {
    /// Flags win over the file; list flags replace the file's lists.
    pub fn merge(inputs: Vec<PathBuf>, file: FileConfig, flags: &Flags) -> RunConfig {
        let pick_list =
            |flag: &[String], file: Vec<String>| if flag.is_empty() { file } else { flag.to_vec() };
        let strict = flags.strict_unused || file.strict_unused.unwrap_or(false);
        let default_jobs = std::thread::available_parallelism().map_or(1, usize::from);
        let mut rulesets = file.rulesets;
        rulesets.extend(flags.ruleset.iter().cloned());
        RunConfig {
            inputs,
            format: flags.format.or(file.format).unwrap_or(OutputFormat::Text),
            rules: RuleConfig {
                max_line_length: flags
                    .max_line_length
                    .or(file.max_line_length)
                    .unwrap_or(DEFAULT_MAX_LINE_LENGTH),
                select: pick_list(&flags.select, file.select),
                ignore: pick_list(&flags.ignore, file.ignore),
            },
            unused: UnusedConfig {
                policy: if strict {
                    UnusedPolicy::strict()
                } else {
                    UnusedPolicy::default()
                },
                dead_stores: file.dead_stores.unwrap_or(false),
                unused_imports: file.unused_imports.unwrap_or(false),
            },
            rulesets,
            include_scripts: flags.include_scripts || file.include_scripts.unwrap_or(false),
            jobs: flags
                .jobs
                .map(usize::from)
                .or(file.jobs)
                .unwrap_or(default_jobs)
                .max(1),
            file_related: flags.file_related || file.file_related.unwrap_or(false),
            keep_assignment_magics: file.keep_assignment_magics.unwrap_or(false),
            allow_non_python: file.allow_non_python.unwrap_or(false),
        }
    }

    /// The bundled ruleset followed by every extra one.
    pub fn ruleset(&self) -> Result<DeprecationRuleset, RulesetError> {
        let mut sets = vec![bundled_ruleset()];
        for p in &self.rulesets {
            sets.push(if p.is_dir() {
                load_ruleset_dir(p)?
            } else {
                load_ruleset(p)?
            });
        }
        DeprecationRuleset::merge(sets)
    }

    pub fn analysis_config(&self) -> Result<AnalysisConfig, RulesetError> {
        Ok(AnalysisConfig {
            rules: self.rules.clone(),
            unused: self.unused,
            ruleset: self.ruleset()?,
            normalization: NormalizationConfig {
                keep_assignment_magics: self.keep_assignment_magics,
            },
            parse: ParseOptions {
                allow_non_python: self.allow_non_python,
            },
            include_scripts: self.include_scripts,
            jobs: self.jobs,
            file_related: self.file_related,
        })
    }
}

fn run_config(inputs: Vec<PathBuf>, flags: &Flags, cwd: &Path) -> Result<RunConfig, ConfigError> {
    let file = match flags
        .config
        .as_ref()
        .map(|p| cwd.join(p))
        .or_else(|| find_config(cwd))
    {
        Some(path) => load_config(&path)?,
        None => FileConfig::default(),
    };
    Ok(RunConfig::merge(inputs, file, flags))
}

#[derive(Serialize)]
struct FileDiagnostics<'a> {
    path: &'a Path,
    diagnostics: &'a [Diagnostic],
}

pub fn cmd_lint(args: &RunArgs, cwd: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = match run_config(args.inputs.clone(), &args.flags, cwd) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let cfg = match run.analysis_config() {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let resolved = resolve_inputs(&run.inputs, cfg.include_scripts);
    for d in &resolved.unresolved {
        let _ = writeln!(err, "{d}");
    }
    if resolved.inputs.is_empty() {
        if resolved.unresolved.is_empty() {
            let _ = writeln!(err, "nblint: no notebooks or scripts found");
        }
        return EXIT_ERROR;
    }
    let results = analyze_inputs(&resolved.inputs, &cfg);
    let written = match run.format {
        OutputFormat::Text => results
            .iter()
            .flat_map(|f| &f.diagnostics)
            .try_for_each(|d| writeln!(out, "{d}")),
        OutputFormat::Json => {
            let files: Vec<FileDiagnostics> = results
                .iter()
                .map(|f| FileDiagnostics {
                    path: &f.path,
                    diagnostics: &f.diagnostics,
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &files)
                .map_err(std::io::Error::from)
                .and_then(|()| writeln!(out))
        }
    };
    if let Err(e) = written {
        return fail(err, &e);
    }
    if !resolved.unresolved.is_empty() || results.iter().any(FileAnalysis::failed_to_load) {
        EXIT_ERROR
    } else if results.iter().any(|f| !f.diagnostics.is_empty()) {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

pub fn cmd_report(args: &RunArgs, cwd: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = match run_config(args.inputs.clone(), &args.flags, cwd) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let cfg = match run.analysis_config() {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let format = match run.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    match analyze_corpus(&run.inputs, &cfg).and_then(|r| render(&r, format)) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_CLEAN,
            Err(e) => fail(err, &e),
        },
        Err(e) => fail(err, &e),
    }
}

#[derive(Serialize)]
struct RulesListing {
    style: Vec<crate::style::StyleRule>,
    deprecations: DeprecationRuleset,
    other: Vec<(&'static str, &'static str)>,
}

pub fn cmd_rules(flags: &Flags, cwd: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = match run_config(Vec::new(), flags, cwd) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let ruleset = match run.ruleset() {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let text = match run.format {
        OutputFormat::Json => {
            let listing = RulesListing {
                style: rule_catalog(),
                deprecations: ruleset,
                other: OTHER_CODES.to_vec(),
            };
            match serde_json::to_string_pretty(&listing) {
                Ok(s) => s + "\n",
                Err(e) => return fail(err, &e),
            }
        }
        OutputFormat::Text => rules_text(&ruleset),
    };
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_CLEAN,
        Err(e) => fail(err, &e),
    }
}

fn rules_text(ruleset: &DeprecationRuleset) -> String {
    let mut s = String::from("style\n");
    for r in rule_catalog() {
        let tag = if r.file_related {
            "  (file-related)"
        } else {
            ""
        };
        s.push_str(&format!("  {}  {}{tag}\n", r.code, r.message_template));
    }
    s.push_str(&format!(
        "\ndeprecations: {} ({})\n",
        ruleset.library, ruleset.source
    ));
    for r in &ruleset.rules {
        let replacement = r.replacement.as_deref().unwrap_or("-");
        s.push_str(&format!(
            "  {:<34} {:<7} -> {replacement}\n",
            r.target,
            format!("{:?}", r.kind).to_lowercase()
        ));
    }
    s.push_str("\nother codes\n");
    for (code, what) in OTHER_CODES {
        s.push_str(&format!("  {code}  {what}\n"));
    }
    s
}

fn fail(err: &mut dyn Write, e: &dyn std::fmt::Display) -> i32 {
    let _ = writeln!(err, "nblint: {e}");
    EXIT_ERROR
}

/// Parses `args` (program name first) and runs the command. `cwd` is where
/// the config file search starts; input paths are used as given. Usage errors
/// exit with 2; `--help` and `--version` with 0.
pub fn run<I, T>(args: I, cwd: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_CLEAN
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match &cli.command {
        Command::Lint(a) => cmd_lint(a, cwd, out, err),
        Command::Report(a) => cmd_report(a, cwd, out, err),
        Command::Rules(f) => cmd_rules(f, cwd, out, err),
    }
}
