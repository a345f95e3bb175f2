//! Syntax tree with binding context on every name node.
//!
//! Parsing is delegated to `rustpython-parser`; the result is lowered into a
//! small uniform tree ([`AstNode`]) whose children follow the field order of
//! CPython's `ast` module. Each kind documents its child layout. Optional
//! parts and statement lists are wrapped in [`NodeKind::Block`] so positions
//! stay fixed.
//!
//! Columns in [`Span`] are UTF-8 byte offsets, as in CPython's `ast`.

use std::fmt;

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::text_size::TextRange;
use rustpython_parser::Parse;
use thiserror::Error;

use super::tokenize::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctx {
    Load,
    Store,
    Del,
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ctx::Load => "Load",
            Ctx::Store => "Store",
            Ctx::Del => "Del",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportName {
    /// Dotted module path (`import a.b`) or imported member (`from m import b`).
    pub name: String,
    pub asname: Option<String>,
    pub span: Span,
}

impl ImportName {
    /// The local name this import binds.
    pub fn bound_name(&self, from_import: bool) -> &str {
        match &self.asname {
            Some(alias) => alias,
            None if from_import => &self.name,
            None => self.name.split('.').next().unwrap_or(&self.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    PositionalOnly,
    Positional,
    VarArgs,
    KeywordOnly,
    VarKeywords,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComprehensionKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// Children: statements.
    Module,
    /// A list of statements, or an optional part (zero or one child).
    Block,

    /// `[decorators: Block, params: Arguments, returns: Block, body: Block]`
    FunctionDef {
        name: String,
        is_async: bool,
    },
    /// `[decorators: Block, bases: Block, body: Block]`; keyword arguments
    /// of the class statement appear in `bases` as `Keyword` nodes.
    ClassDef {
        name: String,
    },
    /// `[value?]`
    Return,
    /// `[targets...]`
    Delete,
    /// `[targets..., value]`
    Assign,
    /// `[target, value]`
    AugAssign {
        op: String,
    },
    /// `[target, annotation, value?]`
    AnnAssign {
        has_value: bool,
    },
    /// `[target, iter, body: Block, orelse: Block]`
    For {
        is_async: bool,
    },
    /// `[test, body: Block, orelse: Block]`
    While,
    /// `[test, body: Block, orelse: Block]`
    If,
    /// `[WithItem..., body: Block]`
    With {
        is_async: bool,
    },
    /// `[context, target?]`
    WithItem,
    /// `[subject, Block(guard?, body statements)...]`; patterns are not lowered.
    Match,
    /// `[exc?, cause?]`
    Raise,
    /// `[body: Block, handlers: Block, orelse: Block, finalbody: Block]`
    Try,
    /// `[type: Block, body: Block]`
    ExceptHandler {
        name: Option<String>,
    },
    /// `[test, msg?]`
    Assert,
    Import {
        names: Vec<ImportName>,
    },
    ImportFrom {
        module: Option<String>,
        level: u32,
        names: Vec<ImportName>,
    },
    Global {
        names: Vec<String>,
    },
    Nonlocal {
        names: Vec<String>,
    },
    /// `[value]`
    ExprStmt,
    Pass,
    Break,
    Continue,

    /// `[values...]`
    BoolOp {
        op: String,
    },
    /// `[target, value]`
    NamedExpr,
    /// `[left, right]`
    BinOp {
        op: String,
    },
    /// `[operand]`
    UnaryOp {
        op: String,
    },
    /// `[params: Arguments, body]`
    Lambda,
    /// `[test, body, orelse]`
    IfExp,
    /// Keys and values in source order; `**mapping` contributes its value only.
    Dict,
    /// `[elts...]`
    Set,
    /// `[element..., Generator...]`; dict comprehensions have key and value.
    Comprehension {
        kind: ComprehensionKind,
    },
    /// One `for` clause: `[target, iter, ifs...]`
    Generator {
        is_async: bool,
    },
    /// `[value?]`
    Await,
    Yield,
    YieldFrom,
    /// `[left, comparators...]`
    Compare {
        ops: Vec<String>,
    },
    /// `[func, args..., Keyword...]`
    Call,
    /// `[value]`
    Keyword {
        arg: Option<String>,
    },
    /// `[parts...]`
    FString,
    /// `[value, format_spec?]`
    FormattedValue,
    Constant {
        value: String,
    },
    /// `[value]`
    Attribute {
        attr: String,
        ctx: Ctx,
    },
    /// `[value, slice]`
    Subscript {
        ctx: Ctx,
    },
    /// `[value]`
    Starred {
        ctx: Ctx,
    },
    Name {
        id: String,
        ctx: Ctx,
    },
    /// `[elts...]`
    List {
        ctx: Ctx,
    },
    /// `[elts...]`
    Tuple {
        ctx: Ctx,
    },
    /// `[lower?, upper?, step?]`, present parts only.
    Slice,
    /// `[Parameter...]`
    Arguments,
    /// `[annotation: Block, default: Block]`
    Parameter {
        name: String,
        kind: ParamKind,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<AstNode>,
}

impl AstNode {
    fn new(kind: NodeKind, span: Span, children: Vec<AstNode>) -> AstNode {
        AstNode {
            kind,
            span,
            children,
        }
    }

    pub fn child(&self, i: usize) -> Option<&AstNode> {
        self.children.get(i)
    }

    /// Pre-order iterator over this node and all descendants.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }

    /// Every name node as `(id, ctx, start)`, in pre-order.
    pub fn names(&self) -> Vec<(&str, Ctx, Pos)> {
        self.walk()
            .filter_map(|n| match &n.kind {
                NodeKind::Name { id, ctx } => Some((id.as_str(), *ctx, n.span.start)),
                _ => None,
            })
            .collect()
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a AstNode>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<&'a AstNode> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at line {}, column {}", .pos.line, .pos.col + 1)]
pub struct ParseError {
    pub message: String,
    /// Byte column, 0-based.
    pub pos: Pos,
}

/// Parses Python source into a module node.
pub fn parse_ast(text: &str) -> Result<AstNode, ParseError> {
    let index = LineIndex::new(text);
    let suite = ast::Suite::parse(text, "<cell>").map_err(|e| ParseError {
        message: e.error.to_string(),
        pos: index.pos(u32::from(e.offset) as usize),
    })?;
    let lower = Lower { index };
    let body: Vec<AstNode> = suite.iter().map(|s| lower.stmt(s)).collect();
    let span = Span {
        start: Pos::new(1, 0),
        end: lower.index.pos(text.len()),
    };
    Ok(AstNode::new(NodeKind::Module, span, body))
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> LineIndex {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn pos(&self, offset: usize) -> Pos {
        let line = self.starts.partition_point(|&s| s <= offset);
        Pos::new(line, offset - self.starts[line - 1])
    }
}

struct Lower {
    index: LineIndex,
}

fn ctx_of(ctx: &ast::ExprContext) -> Ctx {
    match ctx {
        ast::ExprContext::Load => Ctx::Load,
        ast::ExprContext::Store => Ctx::Store,
        ast::ExprContext::Del => Ctx::Del,
    }
}

fn op_text(op: &ast::Operator) -> &'static str {
    use ast::Operator::*;
    match op {
        Add => "+",
        Sub => "-",
        Mult => "*",
        MatMult => "@",
        Div => "/",
        Mod => "%",
        Pow => "**",
        LShift => "<<",
        RShift => ">>",
        BitOr => "|",
        BitXor => "^",
        BitAnd => "&",
        FloorDiv => "//",
    }
}

fn cmp_text(op: &ast::CmpOp) -> &'static str {
    use ast::CmpOp::*;
    match op {
        Eq => "==",
        NotEq => "!=",
        Lt => "<",
        LtE => "<=",
        Gt => ">",
        GtE => ">=",
        Is => "is",
        IsNot => "is not",
        In => "in",
        NotIn => "not in",
    }
}

impl Lower {
    fn span(&self, range: TextRange) -> Span {
        Span {
            start: self.index.pos(u32::from(range.start()) as usize),
            end: self.index.pos(u32::from(range.end()) as usize),
        }
    }

    fn covering(children: &[AstNode]) -> Span {
        match (children.first(), children.last()) {
            (Some(a), Some(b)) => Span {
                start: a.span.start,
                end: b.span.end,
            },
            _ => Span::default(),
        }
    }

    fn block(&self, stmts: &[ast::Stmt]) -> AstNode {
        let children: Vec<AstNode> = stmts.iter().map(|s| self.stmt(s)).collect();
        AstNode::new(NodeKind::Block, Self::covering(&children), children)
    }

    fn opt_block(&self, expr: Option<&ast::Expr>) -> AstNode {
        let children: Vec<AstNode> = expr.map(|e| self.expr(e)).into_iter().collect();
        AstNode::new(NodeKind::Block, Self::covering(&children), children)
    }

    fn exprs(&self, exprs: &[ast::Expr]) -> Vec<AstNode> {
        exprs.iter().map(|e| self.expr(e)).collect()
    }

    fn import_names(&self, names: &[ast::Alias]) -> Vec<ImportName> {
        names
            .iter()
            .map(|a| ImportName {
                name: a.name.to_string(),
                asname: a.asname.as_ref().map(|n| n.to_string()),
                span: self.span(a.range),
            })
            .collect()
    }

    fn arguments(&self, args: &ast::Arguments) -> AstNode {
        let mut params = Vec::new();
        let with_default =
            |list: &[ast::ArgWithDefault], kind: ParamKind, params: &mut Vec<AstNode>| {
                for a in list {
                    params.push(self.parameter(&a.def, kind, a.default.as_deref()));
                }
            };
        with_default(&args.posonlyargs, ParamKind::PositionalOnly, &mut params);
        with_default(&args.args, ParamKind::Positional, &mut params);
        if let Some(v) = &args.vararg {
            params.push(self.parameter(v, ParamKind::VarArgs, None));
        }
        with_default(&args.kwonlyargs, ParamKind::KeywordOnly, &mut params);
        if let Some(k) = &args.kwarg {
            params.push(self.parameter(k, ParamKind::VarKeywords, None));
        }
        AstNode::new(NodeKind::Arguments, Self::covering(&params), params)
    }

    fn parameter(&self, arg: &ast::Arg, kind: ParamKind, default: Option<&ast::Expr>) -> AstNode {
        AstNode::new(
            NodeKind::Parameter {
                name: arg.arg.to_string(),
                kind,
            },
            self.span(arg.range),
            vec![
                self.opt_block(arg.annotation.as_deref()),
                self.opt_block(default),
            ],
        )
    }

    fn generators(&self, gens: &[ast::Comprehension]) -> Vec<AstNode> {
        gens.iter()
            .map(|g| {
                let mut children = vec![self.expr(&g.target), self.expr(&g.iter)];
                children.extend(self.exprs(&g.ifs));
                AstNode::new(
                    NodeKind::Generator {
                        is_async: g.is_async,
                    },
                    Self::covering(&children),
                    children,
                )
            })
            .collect()
    }

    fn stmt(&self, stmt: &ast::Stmt) -> AstNode {
        use ast::Stmt as S;
        let span = self.span(stmt.range());
        let (kind, children) = match stmt {
            S::FunctionDef(f) => (
                NodeKind::FunctionDef {
                    name: f.name.to_string(),
                    is_async: false,
                },
                vec![
                    self.decorators(&f.decorator_list),
                    self.arguments(&f.args),
                    self.opt_block(f.returns.as_deref()),
                    self.block(&f.body),
                ],
            ),
            S::AsyncFunctionDef(f) => (
                NodeKind::FunctionDef {
                    name: f.name.to_string(),
                    is_async: true,
                },
                vec![
                    self.decorators(&f.decorator_list),
                    self.arguments(&f.args),
                    self.opt_block(f.returns.as_deref()),
                    self.block(&f.body),
                ],
            ),
            S::ClassDef(c) => {
                let mut bases = self.exprs(&c.bases);
                bases.extend(c.keywords.iter().map(|k| self.keyword(k)));
                let bases = AstNode::new(NodeKind::Block, Self::covering(&bases), bases);
                (
                    NodeKind::ClassDef {
                        name: c.name.to_string(),
                    },
                    vec![
                        self.decorators(&c.decorator_list),
                        bases,
                        self.block(&c.body),
                    ],
                )
            }
            S::Return(r) => (
                NodeKind::Return,
                r.value.iter().map(|v| self.expr(v)).collect(),
            ),
            S::Delete(d) => (NodeKind::Delete, self.exprs(&d.targets)),
            S::Assign(a) => {
                let mut children = self.exprs(&a.targets);
                children.push(self.expr(&a.value));
                (NodeKind::Assign, children)
            }
            S::TypeAlias(t) => (
                NodeKind::Assign,
                vec![self.expr(&t.name), self.expr(&t.value)],
            ),
            S::AugAssign(a) => (
                NodeKind::AugAssign {
                    op: op_text(&a.op).to_string(),
                },
                vec![self.expr(&a.target), self.expr(&a.value)],
            ),
            S::AnnAssign(a) => {
                let mut children = vec![self.expr(&a.target), self.expr(&a.annotation)];
                children.extend(a.value.iter().map(|v| self.expr(v)));
                (
                    NodeKind::AnnAssign {
                        has_value: a.value.is_some(),
                    },
                    children,
                )
            }
            S::For(f) => (
                NodeKind::For { is_async: false },
                vec![
                    self.expr(&f.target),
                    self.expr(&f.iter),
                    self.block(&f.body),
                    self.block(&f.orelse),
                ],
            ),
            S::AsyncFor(f) => (
                NodeKind::For { is_async: true },
                vec![
                    self.expr(&f.target),
                    self.expr(&f.iter),
                    self.block(&f.body),
                    self.block(&f.orelse),
                ],
            ),
            S::While(w) => (
                NodeKind::While,
                vec![
                    self.expr(&w.test),
                    self.block(&w.body),
                    self.block(&w.orelse),
                ],
            ),
            S::If(i) => (
                NodeKind::If,
                vec![
                    self.expr(&i.test),
                    self.block(&i.body),
                    self.block(&i.orelse),
                ],
            ),
            S::With(w) => (
                NodeKind::With { is_async: false },
                self.with_items(&w.items, &w.body),
            ),
            S::AsyncWith(w) => (
                NodeKind::With { is_async: true },
                self.with_items(&w.items, &w.body),
            ),
            S::Match(m) => {
                let mut children = vec![self.expr(&m.subject)];
                for case in &m.cases {
                    let mut parts: Vec<AstNode> = case.guard.iter().map(|g| self.expr(g)).collect();
                    parts.extend(case.body.iter().map(|s| self.stmt(s)));
                    children.push(AstNode::new(NodeKind::Block, Self::covering(&parts), parts));
                }
                (NodeKind::Match, children)
            }
            S::Raise(r) => {
                let children = r
                    .exc
                    .iter()
                    .chain(r.cause.iter())
                    .map(|e| self.expr(e))
                    .collect();
                (NodeKind::Raise, children)
            }
            S::Try(t) => (
                NodeKind::Try,
                self.try_parts(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            ),
            S::TryStar(t) => (
                NodeKind::Try,
                self.try_parts(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            ),
            S::Assert(a) => {
                let mut children = vec![self.expr(&a.test)];
                children.extend(a.msg.iter().map(|m| self.expr(m)));
                (NodeKind::Assert, children)
            }
            S::Import(i) => (
                NodeKind::Import {
                    names: self.import_names(&i.names),
                },
                Vec::new(),
            ),
            S::ImportFrom(i) => (
                NodeKind::ImportFrom {
                    module: i.module.as_ref().map(|m| m.to_string()),
                    level: i.level.map_or(0, |l| l.to_u32()),
                    names: self.import_names(&i.names),
                },
                Vec::new(),
            ),
            S::Global(g) => (
                NodeKind::Global {
                    names: g.names.iter().map(|n| n.to_string()).collect(),
                },
                Vec::new(),
            ),
            S::Nonlocal(n) => (
                NodeKind::Nonlocal {
                    names: n.names.iter().map(|n| n.to_string()).collect(),
                },
                Vec::new(),
            ),
            S::Expr(e) => (NodeKind::ExprStmt, vec![self.expr(&e.value)]),
            S::Pass(_) => (NodeKind::Pass, Vec::new()),
            S::Break(_) => (NodeKind::Break, Vec::new()),
            S::Continue(_) => (NodeKind::Continue, Vec::new()),
        };
        AstNode::new(kind, span, children)
    }

    fn decorators(&self, list: &[ast::Expr]) -> AstNode {
        let children = self.exprs(list);
        AstNode::new(NodeKind::Block, Self::covering(&children), children)
    }

    fn with_items(&self, items: &[ast::WithItem], body: &[ast::Stmt]) -> Vec<AstNode> {
        let mut children: Vec<AstNode> = items
            .iter()
            .map(|item| {
                let mut parts = vec![self.expr(&item.context_expr)];
                parts.extend(item.optional_vars.iter().map(|v| self.expr(v)));
                AstNode::new(NodeKind::WithItem, Self::covering(&parts), parts)
            })
            .collect();
        children.push(self.block(body));
        children
    }

    fn try_parts(
        &self,
        body: &[ast::Stmt],
        handlers: &[ast::ExceptHandler],
        orelse: &[ast::Stmt],
        finalbody: &[ast::Stmt],
    ) -> Vec<AstNode> {
        let handlers: Vec<AstNode> = handlers
            .iter()
            .map(|h| {
                let ast::ExceptHandler::ExceptHandler(h) = h;
                AstNode::new(
                    NodeKind::ExceptHandler {
                        name: h.name.as_ref().map(|n| n.to_string()),
                    },
                    self.span(h.range),
                    vec![self.opt_block(h.type_.as_deref()), self.block(&h.body)],
                )
            })
            .collect();
        let handlers = AstNode::new(NodeKind::Block, Self::covering(&handlers), handlers);
        vec![
            self.block(body),
            handlers,
            self.block(orelse),
            self.block(finalbody),
        ]
    }

    fn keyword(&self, k: &ast::Keyword) -> AstNode {
        AstNode::new(
            NodeKind::Keyword {
                arg: k.arg.as_ref().map(|a| a.to_string()),
            },
            self.span(k.range),
            vec![self.expr(&k.value)],
        )
    }

    fn expr(&self, expr: &ast::Expr) -> AstNode {
        use ast::Expr as E;
        let span = self.span(expr.range());
        let (kind, children) = match expr {
            E::BoolOp(b) => {
                let op = match b.op {
                    ast::BoolOp::And => "and",
                    ast::BoolOp::Or => "or",
                };
                (
                    NodeKind::BoolOp { op: op.to_string() },
                    self.exprs(&b.values),
                )
            }
            E::NamedExpr(n) => (
                NodeKind::NamedExpr,
                vec![self.expr(&n.target), self.expr(&n.value)],
            ),
            E::BinOp(b) => (
                NodeKind::BinOp {
                    op: op_text(&b.op).to_string(),
                },
                vec![self.expr(&b.left), self.expr(&b.right)],
            ),
            E::UnaryOp(u) => {
                let op = match u.op {
                    ast::UnaryOp::Invert => "~",
                    ast::UnaryOp::Not => "not",
                    ast::UnaryOp::UAdd => "+",
                    ast::UnaryOp::USub => "-",
                };
                (
                    NodeKind::UnaryOp { op: op.to_string() },
                    vec![self.expr(&u.operand)],
                )
            }
            E::Lambda(l) => (
                NodeKind::Lambda,
                vec![self.arguments(&l.args), self.expr(&l.body)],
            ),
            E::IfExp(i) => (
                NodeKind::IfExp,
                vec![self.expr(&i.test), self.expr(&i.body), self.expr(&i.orelse)],
            ),
            E::Dict(d) => {
                let mut children = Vec::new();
                for (k, v) in d.keys.iter().zip(&d.values) {
                    if let Some(k) = k {
                        children.push(self.expr(k));
                    }
                    children.push(self.expr(v));
                }
                (NodeKind::Dict, children)
            }
            E::Set(s) => (NodeKind::Set, self.exprs(&s.elts)),
            E::ListComp(c) => {
                let mut children = vec![self.expr(&c.elt)];
                children.extend(self.generators(&c.generators));
                (
                    NodeKind::Comprehension {
                        kind: ComprehensionKind::List,
                    },
                    children,
                )
            }
            E::SetComp(c) => {
                let mut children = vec![self.expr(&c.elt)];
                children.extend(self.generators(&c.generators));
                (
                    NodeKind::Comprehension {
                        kind: ComprehensionKind::Set,
                    },
                    children,
                )
            }
            E::GeneratorExp(c) => {
                let mut children = vec![self.expr(&c.elt)];
                children.extend(self.generators(&c.generators));
                (
                    NodeKind::Comprehension {
                        kind: ComprehensionKind::Generator,
                    },
                    children,
                )
            }
            E::DictComp(c) => {
                let mut children = vec![self.expr(&c.key), self.expr(&c.value)];
                children.extend(self.generators(&c.generators));
                (
                    NodeKind::Comprehension {
                        kind: ComprehensionKind::Dict,
                    },
                    children,
                )
            }
            E::Await(a) => (NodeKind::Await, vec![self.expr(&a.value)]),
            E::Yield(y) => (
                NodeKind::Yield,
                y.value.iter().map(|v| self.expr(v)).collect(),
            ),
            E::YieldFrom(y) => (NodeKind::YieldFrom, vec![self.expr(&y.value)]),
            E::Compare(c) => {
                let mut children = vec![self.expr(&c.left)];
                children.extend(self.exprs(&c.comparators));
                (
                    NodeKind::Compare {
                        ops: c.ops.iter().map(|o| cmp_text(o).to_string()).collect(),
                    },
                    children,
                )
            }
            E::Call(c) => {
                let mut children = vec![self.expr(&c.func)];
                children.extend(self.exprs(&c.args));
                children.extend(c.keywords.iter().map(|k| self.keyword(k)));
                (NodeKind::Call, children)
            }
            E::FormattedValue(f) => {
                let mut children = vec![self.expr(&f.value)];
                children.extend(f.format_spec.iter().map(|s| self.expr(s)));
                (NodeKind::FormattedValue, children)
            }
            E::JoinedStr(j) => (NodeKind::FString, self.exprs(&j.values)),
            E::Constant(c) => (
                NodeKind::Constant {
                    value: constant_text(&c.value),
                },
                Vec::new(),
            ),
            E::Attribute(a) => (
                NodeKind::Attribute {
                    attr: a.attr.to_string(),
                    ctx: ctx_of(&a.ctx),
                },
                vec![self.expr(&a.value)],
            ),
            E::Subscript(s) => (
                NodeKind::Subscript {
                    ctx: ctx_of(&s.ctx),
                },
                vec![self.expr(&s.value), self.expr(&s.slice)],
            ),
            E::Starred(s) => (
                NodeKind::Starred {
                    ctx: ctx_of(&s.ctx),
                },
                vec![self.expr(&s.value)],
            ),
            E::Name(n) => (
                NodeKind::Name {
                    id: n.id.to_string(),
                    ctx: ctx_of(&n.ctx),
                },
                Vec::new(),
            ),
            E::List(l) => (
                NodeKind::List {
                    ctx: ctx_of(&l.ctx),
                },
                self.exprs(&l.elts),
            ),
            E::Tuple(t) => (
                NodeKind::Tuple {
                    ctx: ctx_of(&t.ctx),
                },
                self.exprs(&t.elts),
            ),
            E::Slice(s) => {
                let parts = [&s.lower, &s.upper, &s.step];
                (
                    NodeKind::Slice,
                    parts
                        .iter()
                        .filter_map(|p| p.as_deref())
                        .map(|e| self.expr(e))
                        .collect(),
                )
            }
        };
        AstNode::new(kind, span, children)
    }
}

fn constant_text(c: &ast::Constant) -> String {
    match c {
        ast::Constant::Str(s) => s.clone(),
        ast::Constant::None => "None".into(),
        ast::Constant::Bool(b) => if *b { "True" } else { "False" }.into(),
        ast::Constant::Int(i) => i.to_string(),
        ast::Constant::Float(f) => f.to_string(),
        ast::Constant::Ellipsis => "...".into(),
        other => format!("{other:?}"),
    }
}
