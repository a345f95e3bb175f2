//! Deprecated library API detection.
//!
//! Imports are replayed in chain order to build a map from local names to
//! dotted paths. Attribute chains rooted at imported names are expanded
//! through that map and compared with the targets of a [`DeprecationRuleset`].
//! Matching is purely syntactic; re-exports and dynamic imports are not seen.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::diagnostic::{Category, Diagnostic, Location};
use crate::frontend::ast::{AstNode, Ctx, NodeKind, Span};
use crate::notebook::{CellChain, PythonSource};

pub const DEPRECATED_API: &str = "D001";

const BUNDLED_SKLEARN: &str = include_str!("../rulesets/sklearn.toml");
const BUNDLED_NAME: &str = "<bundled>/sklearn.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Module,
    Symbol,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Module => "module",
            RuleKind::Symbol => "symbol",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeprecationRule {
    pub target: String,
    pub kind: RuleKind,
    pub deprecated_since: Option<String>,
    pub removed_in: Option<String>,
    pub replacement: Option<String>,
    pub note: String,
}

impl DeprecationRule {
    /// Whether a resolved dotted path falls under this rule.
    pub fn matches(&self, path: &str) -> bool {
        match self.kind {
            RuleKind::Symbol => path == self.target,
            RuleKind::Module => is_within(path, &self.target),
        }
    }

    pub fn describe(&self) -> String {
        let mut out = format!("{} is deprecated", self.target);
        if let Some(v) = &self.deprecated_since {
            out.push_str(&format!(" since {v}"));
        }
        if let Some(v) = &self.removed_in {
            out.push_str(&format!(" and removed in {v}"));
        }
        if let Some(r) = &self.replacement {
            out.push_str(&format!("; use {r}"));
        }
        out
    }
}

/// `path` equals `root` or is a dotted descendant of it.
pub fn is_within(path: &str, root: &str) -> bool {
    path == root
        || path
            .strip_prefix(root)
            .is_some_and(|rest| rest.starts_with('.'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeprecationRuleset {
    pub library: String,
    pub source: String,
    pub rules: Vec<DeprecationRule>,
}

impl DeprecationRuleset {
    /// Top-level package names the rules refer to.
    pub fn packages(&self) -> BTreeSet<&str> {
        self.rules
            .iter()
            .filter_map(|r| r.target.split('.').next())
            .collect()
    }

    /// Merges several rulesets; a target defined twice is an error.
    pub fn merge(sets: Vec<DeprecationRuleset>) -> Result<DeprecationRuleset, RulesetError> {
        let mut seen = BTreeSet::new();
        let mut rules = Vec::new();
        let mut libraries = Vec::new();
        let mut sources = Vec::new();
        for set in sets {
            libraries.push(set.library);
            sources.push(set.source);
            for r in set.rules {
                if !seen.insert(r.target.clone()) {
                    return Err(RulesetError::DuplicateTarget {
                        path: PathBuf::from("<merged>"),
                        line: 0,
                        target: r.target,
                    });
                }
                rules.push(r);
            }
        }
        Ok(DeprecationRuleset {
            library: libraries.join(", "),
            source: sources.join("; "),
            rules,
        })
    }
}

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("{}: cannot read ruleset: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed ruleset, field `{field}`: {message}", .path.display())]
    MalformedRuleset {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },
    #[error("{}:{line}: duplicate target `{target}`", .path.display())]
    DuplicateTarget {
        path: PathBuf,
        line: usize,
        target: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRuleset {
    format: Spanned<i64>,
    library: String,
    source: String,
    #[serde(default)]
    rule: Vec<RawRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    target: Spanned<String>,
    kind: RuleKind,
    deprecated_since: Option<String>,
    removed_in: Option<String>,
    replacement: Option<Spanned<String>>,
    #[serde(default)]
    note: String,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// A dotted path of Python identifiers.
pub fn is_dotted_identifier(path: &str) -> bool {
    !path.is_empty()
        && path.split('.').all(|seg| {
            let mut chars = seg.chars();
            chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && chars.all(|c| c.is_alphanumeric() || c == '_')
        })
}

/// Parses ruleset text. `path` is used in error messages only.
pub fn parse_ruleset(text: &str, path: &Path) -> Result<DeprecationRuleset, RulesetError> {
    let malformed = |line: usize, field: &str, message: String| RulesetError::MalformedRuleset {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        message,
    };
    let raw: RawRuleset = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        let field = e
            .span()
            .and_then(|s| {
                let start = s.start.min(text.len());
                let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
                text[line_start..].lines().next()
            })
            .and_then(|l| l.split_once('=').map(|(k, _)| k.trim().to_string()))
            .or_else(|| e.message().split('`').nth(1).map(str::to_string))
            .unwrap_or_default();
        malformed(line, &field, e.message().to_string())
    })?;
    if *raw.format.get_ref() != 1 {
        let line = line_of(text, raw.format.span().start);
        return Err(malformed(
            line,
            "format",
            format!("unsupported format {}", raw.format.get_ref()),
        ));
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut rules = Vec::with_capacity(raw.rule.len());
    for r in raw.rule {
        let line = line_of(text, r.target.span().start);
        let target = r.target.into_inner();
        if !is_dotted_identifier(&target) {
            return Err(malformed(
                line,
                "target",
                format!("`{target}` is not a dotted identifier path"),
            ));
        }
        if let Some(rep) = &r.replacement {
            if !is_dotted_identifier(rep.get_ref()) {
                let line = line_of(text, rep.span().start);
                return Err(malformed(
                    line,
                    "replacement",
                    format!("`{}` is not a dotted identifier path", rep.get_ref()),
                ));
            }
        }
        if seen.insert(target.clone(), line).is_some() {
            return Err(RulesetError::DuplicateTarget {
                path: path.to_path_buf(),
                line,
                target,
            });
        }
        rules.push(DeprecationRule {
            target,
            kind: r.kind,
            deprecated_since: r.deprecated_since,
            removed_in: r.removed_in,
            replacement: r.replacement.map(Spanned::into_inner),
            note: r.note,
        });
    }
    Ok(DeprecationRuleset {
        library: raw.library,
        source: raw.source,
        rules,
    })
}

pub fn load_ruleset(path: &Path) -> Result<DeprecationRuleset, RulesetError> {
    let text = fs::read_to_string(path).map_err(|source| RulesetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ruleset(&text, path)
}

/// Every `*.toml` ruleset in a directory, merged in file-name order.
pub fn load_ruleset_dir(dir: &Path) -> Result<DeprecationRuleset, RulesetError> {
    let io = |source| RulesetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    let sets = paths
        .iter()
        .map(|p| load_ruleset(p))
        .collect::<Result<Vec<_>, _>>()?;
    DeprecationRuleset::merge(sets)
}

/// The scikit-learn ruleset shipped with the crate.
pub fn bundled_ruleset() -> DeprecationRuleset {
    parse_ruleset(BUNDLED_SKLEARN, Path::new(BUNDLED_NAME)).expect("bundled ruleset is valid")
}

pub fn bundled_ruleset_text() -> &'static str {
    BUNDLED_SKLEARN
}

/// Local names bound by imports, as dotted paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportBindings {
    pub names: BTreeMap<String, String>,
    /// Modules imported with `*`, in chain order.
    pub wildcards: Vec<String>,
}

impl ImportBindings {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.names.get(name).map(String::as_str)
    }

    /// Applies one import statement. Relative imports are ignored.
    fn apply(&mut self, node: &AstNode) {
        match &node.kind {
            NodeKind::Import { names } => {
                for n in names {
                    let bound = n.bound_name(false).to_string();
                    let path = if n.asname.is_some() {
                        n.name.clone()
                    } else {
                        bound.clone()
                    };
                    self.names.insert(bound, path);
                }
            }
            NodeKind::ImportFrom {
                module: Some(module),
                level: 0,
                names,
            } => {
                for n in names {
                    if n.name == "*" {
                        self.wildcards.push(module.clone());
                    } else {
                        self.names.insert(
                            n.bound_name(true).to_string(),
                            format!("{module}.{}", n.name),
                        );
                    }
                }
            }
            _ => {}
        }
    }

    /// Expands the root of a dotted chain. Unbound roots are tried against
    /// wildcard imports, most recent first, when `wildcard_ok` accepts the
    /// expansion.
    fn expand(
        &self,
        parts: &[String],
        wildcard_ok: impl Fn(&str) -> bool,
    ) -> Option<(String, String)> {
        let root = parts.first()?;
        let tail: String = parts[1..].iter().map(|p| format!(".{p}")).collect();
        if let Some(base) = self.get(root) {
            return Some((base.to_string(), format!("{base}{tail}")));
        }
        self.wildcards
            .iter()
            .rev()
            .map(|w| format!("{w}.{root}"))
            .find(|b| wildcard_ok(&format!("{b}{tail}")))
            .map(|b| {
                let full = format!("{b}{tail}");
                (b, full)
            })
    }
}

/// Final import bindings after replaying every import of a chain.
pub fn resolve_imports(asts: &[Option<AstNode>]) -> ImportBindings {
    let mut b = ImportBindings::default();
    for ast in asts.iter().flatten() {
        for node in ast.walk() {
            b.apply(node);
        }
    }
    b
}

/// One match of a rule, with the text that triggered it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeprecationFinding {
    pub target: String,
    pub kind: RuleKind,
    pub location: Location,
    /// Source spelling: the imported path or the dotted chain as written.
    pub written: String,
    /// Fully expanded dotted path.
    pub resolved: String,
    /// `(local name, dotted path)` used to expand `written`.
    pub alias: Option<(String, String)>,
    pub message: String,
}

impl DeprecationFinding {
    /// Re-expands `written` through `alias`; equals `resolved` for every
    /// finding on an attribute chain.
    pub fn expand_written(&self) -> String {
        match &self.alias {
            Some((local, path)) => match self.written.strip_prefix(local.as_str()) {
                Some(rest) => format!("{path}{rest}"),
                None => self.written.clone(),
            },
            None => self.written.clone(),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::new(
            DEPRECATED_API,
            self.message.clone(),
            self.location.clone(),
            Category::Deprecated,
        )
    }
}

struct Checker<'a> {
    ruleset: &'a DeprecationRuleset,
    bindings: ImportBindings,
    findings: Vec<DeprecationFinding>,
    path: &'a Path,
    source: &'a PythonSource,
    lines: Vec<&'a str>,
}

fn dotted_chain(node: &AstNode) -> Option<Vec<String>> {
    match &node.kind {
        NodeKind::Name { id, .. } => Some(vec![id.clone()]),
        NodeKind::Attribute { attr, .. } => {
            let mut parts = dotted_chain(&node.children[0])?;
            parts.push(attr.clone());
            Some(parts)
        }
        _ => None,
    }
}

impl<'a> Checker<'a> {
    fn location(&self, span: Span) -> Location {
        let line = span.start.line;
        let column = self
            .lines
            .get(line.wrapping_sub(1))
            .and_then(|t| t.get(..span.start.col))
            .map_or(span.start.col, |h| h.chars().count())
            + 1;
        let origin = self.source.origin_of(line);
        Location {
            path: self.path.to_path_buf(),
            cell: origin.and_then(|o| o.cell),
            line: origin.map_or(line, |o| o.line),
            column,
        }
    }

    fn report(
        &mut self,
        rule: &DeprecationRule,
        span: Span,
        written: String,
        resolved: String,
        alias: Option<(String, String)>,
    ) {
        let mut message = rule.describe();
        if written != resolved {
            message.push_str(&format!(" ({written} resolves to {resolved})"));
        }
        self.findings.push(DeprecationFinding {
            target: rule.target.clone(),
            kind: rule.kind,
            location: self.location(span),
            written,
            resolved,
            alias,
            message,
        });
    }

    fn check_import(&mut self, node: &AstNode) {
        for rule in &self.ruleset.rules {
            match &node.kind {
                NodeKind::Import { names } => {
                    for n in names.iter().filter(|n| rule.matches(&n.name)) {
                        self.report(rule, n.span, n.name.clone(), n.name.clone(), None);
                    }
                }
                NodeKind::ImportFrom {
                    module: Some(module),
                    level: 0,
                    names,
                } => {
                    if rule.matches(module) {
                        self.report(rule, node.span, module.clone(), module.clone(), None);
                        continue;
                    }
                    for n in names.iter().filter(|n| n.name != "*") {
                        let path = format!("{module}.{}", n.name);
                        if rule.matches(&path) {
                            self.report(rule, n.span, path.clone(), path, None);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    /// Checks a maximal dotted chain against every rule on its own. For each
    /// rule the shortest matching prefix is reported, and nothing is reported
    /// when the root binding already lies under the rule (its import was
    /// reported instead).
    fn check_chain(&mut self, node: &AstNode, parts: &[String]) {
        for rule in &self.ruleset.rules {
            let under_rule = |p: &str| {
                let segs: Vec<&str> = p.split('.').collect();
                (1..=segs.len()).any(|n| rule.matches(&segs[..n].join(".")))
            };
            let Some((base, _)) = self.bindings.expand(parts, under_rule) else {
                continue;
            };
            let bound_by_import = self.bindings.get(&parts[0]).is_some();
            if bound_by_import && rule.matches(&base) {
                continue;
            }
            let shortest = if bound_by_import { 2 } else { 1 };
            for len in shortest..=parts.len() {
                let tail: String = parts[1..len].iter().map(|p| format!(".{p}")).collect();
                let resolved = format!("{base}{tail}");
                if rule.matches(&resolved) {
                    let alias = Some((parts[0].clone(), base.clone()));
                    self.report(rule, node.span, parts[..len].join("."), resolved, alias);
                    break;
                }
            }
        }
    }

    /// Uses in expression position, in source order.
    fn uses(&mut self, node: &AstNode) {
        if let NodeKind::Name { id, ctx: Ctx::Load } = &node.kind {
            if self.bindings.get(id).is_none() && !self.bindings.wildcards.is_empty() {
                self.check_chain(node, std::slice::from_ref(id));
            }
            return;
        }
        if matches!(node.kind, NodeKind::Attribute { .. }) {
            if let Some(parts) = dotted_chain(node) {
                self.check_chain(node, &parts);
                return;
            }
        }
        for c in &node.children {
            self.uses(c);
        }
    }

    fn unbind_targets(&mut self, node: &AstNode) {
        match &node.kind {
            NodeKind::Name { id, .. } => {
                self.bindings.names.remove(id);
            }
            NodeKind::Tuple { .. } | NodeKind::List { .. } | NodeKind::Starred { .. } => {
                for c in &node.children {
                    self.unbind_targets(c);
                }
            }
            _ => {}
        }
    }

    fn stmt(&mut self, node: &AstNode) {
        let ch = &node.children;
        match &node.kind {
            NodeKind::Import { .. } | NodeKind::ImportFrom { .. } => {
                self.check_import(node);
                self.bindings.apply(node);
            }
            NodeKind::FunctionDef { .. } => {
                self.uses(&ch[0]);
                self.uses(&ch[1]);
                self.uses(&ch[2]);
                self.block(&ch[3]);
            }
            NodeKind::ClassDef { .. } => {
                self.uses(&ch[0]);
                self.uses(&ch[1]);
                self.block(&ch[2]);
            }
            NodeKind::If | NodeKind::While => {
                self.uses(&ch[0]);
                self.block(&ch[1]);
                self.block(&ch[2]);
            }
            NodeKind::For { .. } => {
                self.uses(&ch[1]);
                self.uses(&ch[0]);
                self.unbind_targets(&ch[0]);
                self.block(&ch[2]);
                self.block(&ch[3]);
            }
            NodeKind::With { .. } => {
                let (body, items) = ch.split_last().expect("with has a body");
                for item in items {
                    self.uses(item);
                    if let Some(t) = item.child(1) {
                        self.unbind_targets(t);
                    }
                }
                self.block(body);
            }
            NodeKind::Try => {
                self.block(&ch[0]);
                for h in &ch[1].children {
                    self.uses(&h.children[0]);
                    self.block(&h.children[1]);
                }
                self.block(&ch[2]);
                self.block(&ch[3]);
            }
            NodeKind::Match => {
                self.uses(&ch[0]);
                for case in &ch[1..] {
                    for part in &case.children {
                        if is_statement(part) {
                            self.stmt(part);
                        } else {
                            self.uses(part);
                        }
                    }
                }
            }
            NodeKind::Assign => {
                let (value, targets) = ch.split_last().expect("assignment has a value");
                self.uses(value);
                for t in targets {
                    self.uses(t);
                    self.unbind_targets(t);
                }
            }
            NodeKind::AnnAssign { .. } | NodeKind::AugAssign { .. } => {
                for c in ch.iter().skip(1) {
                    self.uses(c);
                }
                self.uses(&ch[0]);
                self.unbind_targets(&ch[0]);
            }
            _ => self.uses(node),
        }
    }

    fn block(&mut self, node: &AstNode) {
        for s in &node.children {
            self.stmt(s);
        }
    }
}

fn is_statement(node: &AstNode) -> bool {
    use NodeKind::*;
    matches!(
        node.kind,
        FunctionDef { .. }
            | ClassDef { .. }
            | Return
            | Delete
            | Assign
            | AugAssign { .. }
            | AnnAssign { .. }
            | For { .. }
            | While
            | If
            | With { .. }
            | Match
            | Raise
            | Try
            | Assert
            | Import { .. }
            | ImportFrom { .. }
            | Global { .. }
            | Nonlocal { .. }
            | ExprStmt
            | Pass
            | Break
            | Continue
    )
}

/// Every rule match in a chain, in chain order. `asts[i]` is the parse of
/// entry `i`; unparsed cells are skipped.
pub fn find_deprecations(
    chain: &CellChain,
    asts: &[Option<AstNode>],
    ruleset: &DeprecationRuleset,
) -> Vec<DeprecationFinding> {
    let mut bindings = ImportBindings::default();
    let mut findings = Vec::new();
    for (entry, ast) in chain.entries.iter().zip(asts) {
        let Some(ast) = ast else { continue };
        let mut c = Checker {
            ruleset,
            bindings: std::mem::take(&mut bindings),
            findings: Vec::new(),
            path: &chain.notebook_path,
            source: &entry.source,
            lines: entry.source.text.split('\n').collect(),
        };
        for s in &ast.children {
            c.stmt(s);
        }
        bindings = c.bindings;
        findings.extend(c.findings);
    }
    findings
}

/// `D001` diagnostics for a chain, one per occurrence.
pub fn check_deprecations(
    chain: &CellChain,
    asts: &[Option<AstNode>],
    ruleset: &DeprecationRuleset,
) -> Vec<Diagnostic> {
    find_deprecations(chain, asts, ruleset)
        .iter()
        .map(DeprecationFinding::to_diagnostic)
        .collect()
}

/// Whether any import in the chain reaches into `package`.
pub fn imports_package(asts: &[Option<AstNode>], package: &str) -> bool {
    asts.iter()
        .flatten()
        .flat_map(AstNode::walk)
        .any(|n| match &n.kind {
            NodeKind::Import { names } => names.iter().any(|i| is_within(&i.name, package)),
            NodeKind::ImportFrom {
                module: Some(m),
                level: 0,
                ..
            } => is_within(m, package),
            _ => false,
        })
}

/// Per-notebook input to [`deprecation_summary`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NotebookDeprecations {
    pub targets: BTreeSet<String>,
    pub imports_library: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeprecationSummary {
    /// `(target, notebooks with at least one match)`, most frequent first.
    pub rows: Vec<(String, usize)>,
    pub affected_notebooks: usize,
    pub library_notebooks: usize,
    /// `affected / library`; absent when no notebook imports the library.
    pub affected_fraction: Option<f64>,
}

pub fn deprecation_summary(
    per_notebook: &[NotebookDeprecations],
    ruleset: &DeprecationRuleset,
) -> DeprecationSummary {
    let targets: Vec<&str> = ruleset.rules.iter().map(|r| r.target.as_str()).collect();
    summarize_targets(per_notebook, &targets)
}

/// [`deprecation_summary`] for a plain list of rule targets.
pub fn summarize_targets(
    per_notebook: &[NotebookDeprecations],
    targets: &[&str],
) -> DeprecationSummary {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for nb in per_notebook {
        for &t in targets {
            if nb.targets.contains(t) {
                *counts.entry(t).or_default() += 1;
            }
        }
    }
    let mut rows: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(t, n)| (t.to_string(), n))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let affected = per_notebook
        .iter()
        .filter(|nb| !nb.targets.is_empty())
        .count();
    let library = per_notebook.iter().filter(|nb| nb.imports_library).count();
    DeprecationSummary {
        rows,
        affected_notebooks: affected,
        library_notebooks: library,
        affected_fraction: (library > 0).then(|| affected as f64 / library as f64),
    }
}
