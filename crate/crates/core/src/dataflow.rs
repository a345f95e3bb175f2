//! Variable access table and unused-variable detection.
//!
//! Every cell of a chain is parsed and walked in evaluation order (right-hand
//! sides before targets). Each `Name` occurrence becomes an [`AccessEntry`]
//! with a global ordinal, so a later cell sees the bindings of earlier ones.
//! A name is unused when no Load resolving to the same binding follows its
//! first Store.
//!
//! The analysis is purely syntactic and flow-insensitive: branches and loops
//! are walked once in source order, and dynamic lookups (`globals()`, `eval`)
//! are ignored.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{analysis_codes, Category, Diagnostic, Location};
use crate::frontend::ast::{parse_ast, AstNode, Ctx, NodeKind, Span};
use crate::notebook::{CellChain, PythonSource};

pub const UNUSED_VARIABLE: &str = "U001";
pub const DEAD_STORE: &str = "U002";
pub const UNUSED_IMPORT: &str = "U003";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeKind {
    Notebook,
    Function,
    Class,
    Comprehension,
    Lambda,
}

impl ScopeKind {
    fn is_function_like(self) -> bool {
        matches!(
            self,
            ScopeKind::Function | ScopeKind::Lambda | ScopeKind::Comprehension
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub id: usize,
    pub kind: ScopeKind,
    pub parent: Option<usize>,
    /// Function or class name; `<lambda>`, `<comprehension>` or `<notebook>`.
    pub name: String,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
    /// Names bound in this scope, as Python decides locality.
    pub locals: BTreeSet<String>,
}

/// What kind of statement produced a Store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingOrigin {
    Assignment,
    AugAssign,
    Import,
    Parameter,
    Definition,
    Loop,
    With,
    Except,
    Comprehension,
    NamedExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessLocation {
    /// Position of the cell in the chain.
    pub entry: usize,
    /// Document index of the cell, when the source is a notebook.
    pub cell: Option<usize>,
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessEntry {
    pub name: String,
    pub ctx: Ctx,
    pub location: AccessLocation,
    /// Scope the occurrence is written in.
    pub scope_id: usize,
    pub ordinal: usize,
    /// Set for Store entries.
    pub origin: Option<BindingOrigin>,
    /// The Load half of an augmented assignment.
    pub implicit: bool,
    /// Scope owning the binding this entry refers to; `None` for names that
    /// are never bound in the chain (builtins, star imports).
    pub binding: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariableAccessTable {
    pub entries: Vec<AccessEntry>,
    /// Index equals scope id; scope 0 is the notebook.
    pub scopes: Vec<Scope>,
    /// Ordinal reached when each `from m import *` was seen.
    pub star_imports: Vec<usize>,
    /// String names listed in a top-level `__all__`.
    pub exported: BTreeSet<String>,
}

impl VariableAccessTable {
    pub fn scope(&self, id: usize) -> Option<&Scope> {
        self.scopes.get(id)
    }

    /// Entries bound to `(name, scope)`, in ordinal order.
    pub fn binding_entries<'a>(
        &'a self,
        name: &'a str,
        scope: usize,
    ) -> impl Iterator<Item = &'a AccessEntry> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.name == name && e.binding == Some(scope))
    }

    /// Every `(name, scope)` with at least one Store.
    pub fn bindings(&self) -> BTreeSet<(String, usize)> {
        self.entries
            .iter()
            .filter(|e| e.ctx == Ctx::Store)
            .filter_map(|e| e.binding.map(|s| (e.name.clone(), s)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnusedVariable {
    pub name: String,
    pub defining_location: AccessLocation,
    pub n_stores: usize,
    pub scope_id: usize,
    pub origin: BindingOrigin,
}

/// Which bindings are never reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnusedPolicy {
    pub exclude_underscore: bool,
    pub exclude_parameters: bool,
    pub exclude_imports: bool,
    pub exclude_exported: bool,
}

impl Default for UnusedPolicy {
    fn default() -> Self {
        UnusedPolicy {
            exclude_underscore: true,
            exclude_parameters: true,
            exclude_imports: true,
            exclude_exported: true,
        }
    }
}

impl UnusedPolicy {
    /// Reports every unused binding the analysis can see.
    pub fn strict() -> Self {
        UnusedPolicy {
            exclude_underscore: false,
            exclude_parameters: false,
            exclude_imports: false,
            exclude_exported: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    Underscore,
    Parameter,
    Import,
    Exported,
    /// Function and class names.
    Definition,
    /// Names bound in a class body are attributes.
    ClassAttribute,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exclusion::Underscore => "name starts with an underscore",
            Exclusion::Parameter => "function parameter",
            Exclusion::Import => "import binding",
            Exclusion::Exported => "listed in __all__",
            Exclusion::Definition => "function or class name",
            Exclusion::ClassAttribute => "class attribute",
        })
    }
}

/// Why a binding is not reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A Load of the binding after its first Store.
    Load(AccessEntry),
    Excluded(Exclusion),
}

/// Parses every cell; cells that fail to parse get `None`.
pub fn parse_chain(chain: &CellChain) -> Vec<Option<AstNode>> {
    parse_chain_reporting(chain).0
}

struct Builder<'a> {
    table: VariableAccessTable,
    entry: usize,
    source: Option<&'a PythonSource>,
    lines: Vec<&'a str>,
    /// Names declared by a bare annotation, per scope.
    declared: Vec<BTreeSet<String>>,
}

impl<'a> Builder<'a> {
    fn new_scope(&mut self, kind: ScopeKind, parent: Option<usize>, name: &str) -> usize {
        let id = self.table.scopes.len();
        self.table.scopes.push(Scope {
            id,
            kind,
            parent,
            name: name.to_string(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
            locals: BTreeSet::new(),
        });
        self.declared.push(BTreeSet::new());
        id
    }

    fn location(&self, span: Span) -> AccessLocation {
        let line = span.start.line;
        let column = self
            .lines
            .get(line.wrapping_sub(1))
            .map(|text| {
                text.get(..span.start.col)
                    .map_or(span.start.col, |h| h.chars().count())
            })
            .unwrap_or(span.start.col)
            + 1;
        let origin = self.source.and_then(|s| s.origin_of(line));
        AccessLocation {
            entry: self.entry,
            cell: origin.and_then(|o| o.cell),
            line: origin.map_or(line, |o| o.line),
            column,
        }
    }

    fn push(
        &mut self,
        name: &str,
        ctx: Ctx,
        span: Span,
        scope: usize,
        origin: Option<BindingOrigin>,
        implicit: bool,
    ) {
        let ordinal = self.table.entries.len();
        let location = self.location(span);
        self.table.entries.push(AccessEntry {
            name: name.to_string(),
            ctx,
            location,
            scope_id: scope,
            ordinal,
            origin,
            implicit,
            binding: None,
        });
    }

    fn store(&mut self, name: &str, span: Span, scope: usize, origin: BindingOrigin) {
        self.push(name, Ctx::Store, span, scope, Some(origin), false);
    }

    fn all(&mut self, nodes: &[AstNode], scope: usize) {
        for n in nodes {
            self.visit(n, scope);
        }
    }

    fn target(&mut self, node: &AstNode, scope: usize, origin: BindingOrigin) {
        match &node.kind {
            NodeKind::Name { id, .. } => self.store(id, node.span, scope, origin),
            NodeKind::Tuple { .. } | NodeKind::List { .. } => {
                for c in &node.children {
                    self.target(c, scope, origin);
                }
            }
            NodeKind::Starred { .. } => {
                if let Some(v) = node.child(0) {
                    self.target(v, scope, origin);
                }
            }
            _ => self.visit(node, scope),
        }
    }

    /// Annotations and defaults, evaluated where the function is defined.
    fn parameter_exprs(&mut self, args: &AstNode, scope: usize) {
        for p in &args.children {
            if let Some(default) = p.child(1) {
                self.all(&default.children, scope);
            }
        }
        for p in &args.children {
            if let Some(annotation) = p.child(0) {
                self.all(&annotation.children, scope);
            }
        }
    }

    fn parameters(&mut self, args: &AstNode, scope: usize) {
        for p in &args.children {
            if let NodeKind::Parameter { name, .. } = &p.kind {
                self.store(name, p.span, scope, BindingOrigin::Parameter);
            }
        }
    }

    fn walrus_scope(&self, mut scope: usize) -> usize {
        while self.table.scopes[scope].kind == ScopeKind::Comprehension {
            match self.table.scopes[scope].parent {
                Some(p) => scope = p,
                None => break,
            }
        }
        scope
    }

    fn collect_exported(&mut self, value: &AstNode) {
        if matches!(value.kind, NodeKind::List { .. } | NodeKind::Tuple { .. }) {
            for c in &value.children {
                if let NodeKind::Constant { value } = &c.kind {
                    self.table.exported.insert(value.clone());
                }
            }
        }
    }

    fn visit(&mut self, node: &AstNode, scope: usize) {
        let ch = &node.children;
        match &node.kind {
            NodeKind::FunctionDef { name, .. } => {
                self.all(&ch[0].children, scope);
                self.parameter_exprs(&ch[1], scope);
                self.all(&ch[2].children, scope);
                self.store(name, node.span, scope, BindingOrigin::Definition);
                let inner = self.new_scope(ScopeKind::Function, Some(scope), name);
                self.parameters(&ch[1], inner);
                self.all(&ch[3].children, inner);
            }
            NodeKind::ClassDef { name } => {
                self.all(&ch[0].children, scope);
                self.all(&ch[1].children, scope);
                let inner = self.new_scope(ScopeKind::Class, Some(scope), name);
                self.all(&ch[2].children, inner);
                self.store(name, node.span, scope, BindingOrigin::Definition);
            }
            NodeKind::Lambda => {
                self.parameter_exprs(&ch[0], scope);
                let inner = self.new_scope(ScopeKind::Lambda, Some(scope), "<lambda>");
                self.parameters(&ch[0], inner);
                self.visit(&ch[1], inner);
            }
            NodeKind::Comprehension { .. } => {
                let (gens, elts): (Vec<&AstNode>, Vec<&AstNode>) = ch
                    .iter()
                    .partition(|c| matches!(c.kind, NodeKind::Generator { .. }));
                if let Some(first) = gens.first() {
                    self.visit(&first.children[1], scope);
                }
                let inner =
                    self.new_scope(ScopeKind::Comprehension, Some(scope), "<comprehension>");
                for (i, g) in gens.iter().enumerate() {
                    if i > 0 {
                        self.visit(&g.children[1], inner);
                    }
                    self.target(&g.children[0], inner, BindingOrigin::Comprehension);
                    self.all(&g.children[2..], inner);
                }
                for e in elts {
                    self.visit(e, inner);
                }
            }
            NodeKind::Assign => {
                let (value, targets) = ch.split_last().expect("assignment has a value");
                self.visit(value, scope);
                for t in targets {
                    self.target(t, scope, BindingOrigin::Assignment);
                }
                if scope == 0
                    && targets
                        .iter()
                        .any(|t| matches!(&t.kind, NodeKind::Name { id, .. } if id == "__all__"))
                {
                    self.collect_exported(value);
                }
            }
            NodeKind::AugAssign { .. } => match &ch[0].kind {
                NodeKind::Name { id, .. } => {
                    self.push(id, Ctx::Load, ch[0].span, scope, None, true);
                    self.visit(&ch[1], scope);
                    self.store(id, ch[0].span, scope, BindingOrigin::AugAssign);
                    if scope == 0 && id == "__all__" {
                        self.collect_exported(&ch[1]);
                    }
                }
                _ => {
                    self.visit(&ch[0], scope);
                    self.visit(&ch[1], scope);
                }
            },
            NodeKind::AnnAssign { has_value } => {
                if *has_value {
                    self.visit(&ch[2], scope);
                }
                self.visit(&ch[1], scope);
                match (&ch[0].kind, has_value) {
                    (NodeKind::Name { id, .. }, true) => {
                        self.store(id, ch[0].span, scope, BindingOrigin::Assignment)
                    }
                    (NodeKind::Name { id, .. }, false) => {
                        self.declared[scope].insert(id.clone());
                    }
                    _ => self.target(&ch[0], scope, BindingOrigin::Assignment),
                }
            }
            NodeKind::For { .. } => {
                self.visit(&ch[1], scope);
                self.target(&ch[0], scope, BindingOrigin::Loop);
                self.visit(&ch[2], scope);
                self.visit(&ch[3], scope);
            }
            NodeKind::WithItem => {
                self.visit(&ch[0], scope);
                if let Some(t) = ch.get(1) {
                    self.target(t, scope, BindingOrigin::With);
                }
            }
            NodeKind::ExceptHandler { name } => {
                self.visit(&ch[0], scope);
                if let Some(name) = name {
                    self.store(name, node.span, scope, BindingOrigin::Except);
                }
                self.visit(&ch[1], scope);
            }
            NodeKind::NamedExpr => {
                self.visit(&ch[1], scope);
                if let NodeKind::Name { id, .. } = &ch[0].kind {
                    let home = self.walrus_scope(scope);
                    self.store(id, ch[0].span, home, BindingOrigin::NamedExpr);
                }
            }
            NodeKind::Import { names } => {
                for n in names {
                    self.store(n.bound_name(false), n.span, scope, BindingOrigin::Import);
                }
            }
            NodeKind::ImportFrom { names, .. } => {
                for n in names {
                    if n.name == "*" {
                        self.table.star_imports.push(self.table.entries.len());
                    } else {
                        self.store(n.bound_name(true), n.span, scope, BindingOrigin::Import);
                    }
                }
            }
            NodeKind::Global { names } => self.table.scopes[scope]
                .globals
                .extend(names.iter().cloned()),
            NodeKind::Nonlocal { names } => self.table.scopes[scope]
                .nonlocals
                .extend(names.iter().cloned()),
            NodeKind::Name { id, ctx } => match ctx {
                Ctx::Store => self.store(id, node.span, scope, BindingOrigin::Assignment),
                _ => self.push(id, *ctx, node.span, scope, None, false),
            },
            _ => self.all(ch, scope),
        }
    }

    /// The scope a Store in `scope` binds into, before locality is known.
    fn home_of(&self, name: &str, scope: usize) -> Option<usize> {
        let s = &self.table.scopes[scope];
        if s.globals.contains(name) {
            Some(0)
        } else if s.nonlocals.contains(name) {
            None
        } else {
            Some(scope)
        }
    }

    fn finish(mut self) -> VariableAccessTable {
        for i in 0..self.table.entries.len() {
            let e = &self.table.entries[i];
            if e.ctx == Ctx::Store {
                if let Some(home) = self.home_of(&e.name, e.scope_id) {
                    let name = e.name.clone();
                    self.table.scopes[home].locals.insert(name);
                }
            }
        }
        for (id, names) in self.declared.iter().enumerate() {
            for name in names {
                if let Some(home) = self.home_of(name, id) {
                    self.table.scopes[home].locals.insert(name.clone());
                }
            }
        }
        let scopes = &self.table.scopes;
        for e in &mut self.table.entries {
            e.binding = resolve(scopes, &e.name, e.scope_id);
        }
        self.table
    }
}

/// Lexical resolution of `name` as seen from `scope`. Class bodies are not
/// visible from nested scopes.
fn resolve(scopes: &[Scope], name: &str, scope: usize) -> Option<usize> {
    let global = || scopes[0].locals.contains(name).then_some(0);
    let s = &scopes[scope];
    if scope == 0 {
        return global();
    }
    if s.globals.contains(name) {
        return global();
    }
    if !s.nonlocals.contains(name) && s.locals.contains(name) {
        return Some(scope);
    }
    let mut cur = s.parent;
    while let Some(id) = cur {
        let a = &scopes[id];
        if id == 0 {
            return global();
        }
        if a.kind.is_function_like() {
            if a.globals.contains(name) {
                return global();
            }
            if !a.nonlocals.contains(name) && a.locals.contains(name) {
                return Some(id);
            }
        }
        cur = a.parent;
    }
    None
}

/// Builds the access table for a chain. `asts[i]` is the parse of entry `i`;
/// `None` entries contribute nothing.
pub fn build_access_table(chain: &CellChain, asts: &[Option<AstNode>]) -> VariableAccessTable {
    let mut b = Builder {
        table: VariableAccessTable::default(),
        entry: 0,
        source: None,
        lines: Vec::new(),
        declared: Vec::new(),
    };
    b.new_scope(ScopeKind::Notebook, None, "<notebook>");
    for (i, (entry, ast)) in chain.entries.iter().zip(asts).enumerate() {
        if let Some(ast) = ast {
            b.entry = i;
            b.source = Some(&entry.source);
            b.lines = entry.source.text.split('\n').collect();
            b.all(&ast.children, 0);
        }
    }
    b.finish()
}

/// Access table for bare cell texts. Cells that fail to parse are skipped;
/// locations carry the cell's position as `entry` and no document index.
pub fn access_table_for_cells<S: AsRef<str>>(cells: &[S]) -> VariableAccessTable {
    let mut b = Builder {
        table: VariableAccessTable::default(),
        entry: 0,
        source: None,
        lines: Vec::new(),
        declared: Vec::new(),
    };
    b.new_scope(ScopeKind::Notebook, None, "<notebook>");
    for (i, cell) in cells.iter().enumerate() {
        let text = cell.as_ref();
        if let Ok(ast) = parse_ast(text) {
            b.entry = i;
            b.lines = text.split('\n').collect();
            b.all(&ast.children, 0);
        }
    }
    b.finish()
}

fn first_store<'a>(
    table: &'a VariableAccessTable,
    name: &str,
    scope: usize,
) -> Option<&'a AccessEntry> {
    table
        .entries
        .iter()
        .find(|e| e.ctx == Ctx::Store && e.name == name && e.binding == Some(scope))
}

fn exclusion(
    table: &VariableAccessTable,
    policy: &UnusedPolicy,
    first: &AccessEntry,
    scope: usize,
) -> Option<Exclusion> {
    let origin = first.origin?;
    if origin == BindingOrigin::Definition {
        return Some(Exclusion::Definition);
    }
    if table.scopes[scope].kind == ScopeKind::Class {
        return Some(Exclusion::ClassAttribute);
    }
    if policy.exclude_underscore && first.name.starts_with('_') {
        return Some(Exclusion::Underscore);
    }
    if policy.exclude_parameters && origin == BindingOrigin::Parameter {
        return Some(Exclusion::Parameter);
    }
    if policy.exclude_imports && origin == BindingOrigin::Import {
        return Some(Exclusion::Import);
    }
    if policy.exclude_exported
        && scope == 0
        && (first.name == "__all__" || table.exported.contains(&first.name))
    {
        return Some(Exclusion::Exported);
    }
    None
}

fn later_load<'a>(
    table: &'a VariableAccessTable,
    name: &str,
    scope: usize,
    after: usize,
) -> Option<&'a AccessEntry> {
    table.entries.iter().find(|e| {
        e.ctx == Ctx::Load
            && !e.implicit
            && e.ordinal > after
            && e.name == name
            && e.binding == Some(scope)
    })
}

/// Why `(name, scope)` is not reported, or `None` when it is (or has no Store).
pub fn witness(
    table: &VariableAccessTable,
    policy: &UnusedPolicy,
    name: &str,
    scope: usize,
) -> Option<Witness> {
    let first = first_store(table, name, scope)?;
    if let Some(load) = later_load(table, name, scope, first.ordinal) {
        return Some(Witness::Load(load.clone()));
    }
    exclusion(table, policy, first, scope).map(Witness::Excluded)
}

fn unused_binding(table: &VariableAccessTable, name: &str, scope: usize) -> Option<UnusedVariable> {
    let first = first_store(table, name, scope)?;
    if later_load(table, name, scope, first.ordinal).is_some() {
        return None;
    }
    Some(UnusedVariable {
        name: name.to_string(),
        defining_location: first.location,
        n_stores: table
            .binding_entries(name, scope)
            .filter(|e| e.ctx == Ctx::Store)
            .count(),
        scope_id: scope,
        origin: first.origin.unwrap_or(BindingOrigin::Assignment),
    })
}

/// Bindings stored at least once and never loaded afterwards, sorted by
/// defining location.
pub fn find_unused(table: &VariableAccessTable, policy: &UnusedPolicy) -> Vec<UnusedVariable> {
    let mut out: Vec<UnusedVariable> = table
        .bindings()
        .into_iter()
        .filter_map(|(name, scope)| unused_binding(table, &name, scope))
        .filter(|u| {
            let first = first_store(table, &u.name, u.scope_id).expect("binding has a store");
            exclusion(table, policy, first, u.scope_id).is_none()
        })
        .collect();
    out.sort_by(|a, b| (a.defining_location, &a.name).cmp(&(b.defining_location, &b.name)));
    out
}

/// Import bindings never loaded afterwards. Bindings that `find_unused`
/// already reports under `policy` are left out.
pub fn find_unused_imports(
    table: &VariableAccessTable,
    policy: &UnusedPolicy,
) -> Vec<UnusedVariable> {
    let import_policy = UnusedPolicy {
        exclude_imports: false,
        ..*policy
    };
    let mut out: Vec<UnusedVariable> = find_unused(table, &import_policy)
        .into_iter()
        .filter(|u| u.origin == BindingOrigin::Import)
        .collect();
    if !policy.exclude_imports {
        out.clear();
    }
    out.sort_by(|a, b| (a.defining_location, &a.name).cmp(&(b.defining_location, &b.name)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadStore {
    pub name: String,
    pub location: AccessLocation,
    pub scope_id: usize,
}

/// Stores whose value is never read before the next Store of the same
/// binding. Bindings that are unused as a whole are left to `find_unused`.
pub fn find_dead_stores(table: &VariableAccessTable, policy: &UnusedPolicy) -> Vec<DeadStore> {
    let mut out = Vec::new();
    for (name, scope) in table.bindings() {
        let Some(first) = first_store(table, &name, scope) else {
            continue;
        };
        if exclusion(table, policy, first, scope).is_some()
            || unused_binding(table, &name, scope).is_some()
        {
            continue;
        }
        let entries: Vec<&AccessEntry> = table.binding_entries(&name, scope).collect();
        for (i, e) in entries.iter().enumerate() {
            if e.ctx != Ctx::Store
                || matches!(
                    e.origin,
                    Some(
                        BindingOrigin::Definition
                            | BindingOrigin::Parameter
                            | BindingOrigin::Import
                    )
                )
            {
                continue;
            }
            let read = entries[i + 1..]
                .iter()
                .take_while(|n| n.ctx != Ctx::Store)
                .any(|n| n.ctx == Ctx::Load);
            if !read {
                out.push(DeadStore {
                    name: name.clone(),
                    location: e.location,
                    scope_id: scope,
                });
            }
        }
    }
    out.sort_by(|a, b| (a.location, &a.name).cmp(&(b.location, &b.name)));
    out
}

/// `(notebooks with at least one finding, total findings)`.
pub fn unused_summary<'a, I>(results: I) -> (usize, usize)
where
    I: IntoIterator<Item = &'a [UnusedVariable]>,
{
    results.into_iter().fold((0, 0), |(n, total), r| {
        (n + usize::from(!r.is_empty()), total + r.len())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct UnusedConfig {
    pub policy: UnusedPolicy,
    pub dead_stores: bool,
    pub unused_imports: bool,
}

/// Everything the unused-variable pass found in one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainAnalysis {
    pub table: VariableAccessTable,
    pub unused: Vec<UnusedVariable>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses every cell of a chain. Cells that fail to parse get `None` and an
/// `A002` diagnostic.
pub fn parse_chain_reporting(chain: &CellChain) -> (Vec<Option<AstNode>>, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut asts = Vec::with_capacity(chain.entries.len());
    for entry in &chain.entries {
        let parsed = entry.code.as_ref().map(|_| parse_ast(&entry.source.text));
        if let Some(Err(err)) = &parsed {
            let origin = entry.source.origin_of(err.pos.line);
            let column = entry
                .source
                .text
                .split('\n')
                .nth(err.pos.line.saturating_sub(1))
                .and_then(|l| l.get(..err.pos.col))
                .map_or(err.pos.col, |h| h.chars().count());
            let location = Location {
                path: chain.notebook_path.clone(),
                cell: origin.map_or(entry.source.cell_index(), |o| o.cell),
                line: origin.map_or(err.pos.line, |o| o.line),
                column: column + 1,
            };
            diagnostics.push(Diagnostic::new(
                analysis_codes::SYNTAX_ERROR,
                format!(
                    "syntax error, cell skipped by AST analyses: {}",
                    err.message
                ),
                location,
                Category::Analysis,
            ));
        }
        asts.push(parsed.and_then(Result::ok));
    }
    (asts, diagnostics)
}

/// Builds the table and reports `U` findings for one chain. `asts[i]` is the
/// parse of entry `i`.
pub fn analyze_chain(
    chain: &CellChain,
    asts: &[Option<AstNode>],
    config: &UnusedConfig,
) -> ChainAnalysis {
    let mut diagnostics = Vec::new();
    let table = build_access_table(chain, asts);
    let unused = find_unused(&table, &config.policy);
    let at = |loc: &AccessLocation| Location {
        path: chain.notebook_path.clone(),
        cell: loc.cell,
        line: loc.line,
        column: loc.column,
    };
    for u in &unused {
        let message = format!("variable '{}' is assigned but never used", u.name);
        diagnostics.push(Diagnostic::new(
            UNUSED_VARIABLE,
            message,
            at(&u.defining_location),
            Category::Unused,
        ));
    }
    if config.unused_imports {
        for u in find_unused_imports(&table, &config.policy) {
            let message = format!("'{}' imported but never used", u.name);
            diagnostics.push(Diagnostic::new(
                UNUSED_IMPORT,
                message,
                at(&u.defining_location),
                Category::Unused,
            ));
        }
    }
    if config.dead_stores {
        for d in find_dead_stores(&table, &config.policy) {
            let message = format!("value assigned to '{}' is never read", d.name);
            diagnostics.push(Diagnostic::new(
                DEAD_STORE,
                message,
                at(&d.location),
                Category::Unused,
            ));
        }
    }
    ChainAnalysis {
        table,
        unused,
        diagnostics,
    }
}
