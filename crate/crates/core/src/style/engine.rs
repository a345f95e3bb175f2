//! Single pass over the token stream that interleaves physical-line and
//! logical-line checks in the same order as pycodestyle's `check_all`.

use std::sync::Arc;

use super::checks::{self, At, LogicalContext};
use super::text::{expand_indent, has_noqa, head_chars};
use crate::frontend::logical::build_logical_line;
use crate::frontend::tokenize::{
    physical_lines, tokenize_text, Token, TokenKind, TokenizeErrorKind,
};

/// A finding before cell mapping: 1-based line, 0-based char offset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawFinding {
    pub line: usize,
    pub col: usize,
    pub code: String,
    pub message: String,
}

struct Engine<'a> {
    lines: Vec<&'a str>,
    max_line_length: usize,
    findings: Vec<RawFinding>,
    checked: Vec<bool>,
    lines_read: usize,
    line_number: usize,
    indent_char: Option<char>,
    noqa: bool,
    multiline: bool,
    indent_level: usize,
    previous_logical: String,
    blank_lines: usize,
    blank_before: usize,
}

impl<'a> Engine<'a> {
    fn total(&self) -> usize {
        self.lines.len()
    }

    fn read_through(&mut self, line: usize) {
        let line = line.min(self.total());
        while self.lines_read < line {
            let text = self.lines[self.lines_read];
            if self.indent_char.is_none() {
                if let Some(c) = text
                    .chars()
                    .next()
                    .filter(|c| [' ', '\t', '\u{a0}'].contains(c))
                {
                    self.indent_char = Some(c);
                }
            }
            self.lines_read += 1;
        }
        self.line_number = self.line_number.max(line);
    }

    fn report(&mut self, line: usize, col: usize, code: &str, message: String) {
        self.findings.push(RawFinding {
            line,
            col,
            code: code.to_string(),
            message,
        });
    }

    fn check_physical(&mut self, physical: &str) {
        let n = self.line_number;
        let own_text = n
            .checked_sub(1)
            .and_then(|i| self.lines.get(i))
            .is_some_and(|l| l.trim_end_matches('\n') == physical.trim_end_matches('\n'));
        if own_text {
            self.checked[n - 1] = true;
        }
        if let Some((col, code, msg)) = checks::maximum_line_length(
            physical,
            self.max_line_length,
            self.multiline,
            n,
            self.noqa,
        ) {
            self.report(n, col, code, msg);
        }
        if checks::mixed_indent(physical, self.indent_char).is_some() {
            self.indent_char = physical.chars().next();
        }
        let last = self.lines.last().copied().unwrap_or("");
        if let Some((col, code, msg)) =
            checks::trailing_blank_lines(physical, last, n, self.total())
        {
            self.report(n, col, code, msg);
        }
        if let Some((col, code, msg)) = checks::trailing_whitespace(physical) {
            self.report(n, col, code, msg);
        }
    }

    fn is_eol_token(tok: &Token) -> bool {
        matches!(tok.kind, TokenKind::Nl | TokenKind::Newline)
            || super::text::lstrip(super::text::tail_chars(&tok.line, tok.end.col)) == "\\\n"
    }

    fn maybe_check_physical(&mut self, tok: &Token, prev_physical: &str) {
        if Self::is_eol_token(tok) {
            if tok.line.is_empty() {
                self.check_physical(prev_physical);
            } else {
                let line = Arc::clone(&tok.line);
                self.check_physical(&line);
            }
        } else if tok.kind == TokenKind::String && tok.text.contains('\n') {
            if has_noqa(&tok.line) {
                return;
            }
            self.multiline = true;
            let saved = self.line_number;
            for ln in tok.start.line..tok.end.line {
                self.line_number = ln;
                let physical = format!("{}\n", self.lines[ln - 1]);
                self.check_physical(&physical);
            }
            self.line_number = saved.max(tok.end.line);
            self.multiline = false;
        }
    }

    /// Returns false when the unit has no significant token and must be kept.
    fn check_logical(&mut self, unit: &[Token]) -> bool {
        let line = build_logical_line(unit);
        self.noqa = !line.comments.is_empty() && has_noqa(&line.comments.concat());
        let Some(&(_, start)) = line.mapping.first() else {
            return false;
        };
        let start_line = self.lines.get(start.line - 1).copied().unwrap_or("");
        self.indent_level = expand_indent(head_chars(start_line, start.col));
        if self.blank_before < self.blank_lines {
            self.blank_before = self.blank_lines;
        }
        let ctx = LogicalContext {
            line: &line,
            lines: &self.lines,
            line_number: self.line_number,
            indent_level: self.indent_level,
            indent_char: self.indent_char,
            previous_logical: &self.previous_logical,
            blank_lines: self.blank_lines,
            blank_before: self.blank_before,
            noqa: self.noqa,
        };
        for f in ctx.run() {
            let pos = match f.at {
                At::Offset(o) => line.position_of(o),
                At::Pos(p) => p,
            };
            self.report(pos.line, pos.col, f.code, f.message);
        }
        if !line.text.is_empty() {
            self.previous_logical = line.text.clone();
        }
        self.blank_lines = 0;
        true
    }
}

/// Runs every rule over `text` and returns findings in discovery order.
pub fn check_text(text: &str, max_line_length: usize) -> Vec<RawFinding> {
    let lines = physical_lines(text);
    let total = lines.len();
    let tokenized = tokenize_text(text);
    let mut eng = Engine {
        checked: vec![false; total],
        lines,
        max_line_length,
        findings: Vec::new(),
        lines_read: 0,
        line_number: 0,
        indent_char: None,
        noqa: false,
        multiline: false,
        indent_level: 0,
        previous_logical: String::new(),
        blank_lines: 0,
        blank_before: 0,
    };

    let mut unit: Vec<Token> = Vec::new();
    let mut parens: i64 = 0;
    let mut prev_physical: Arc<str> = Arc::from("");
    for tok in &tokenized.tokens {
        if tok.start.line > total {
            break;
        }
        eng.read_through(tok.end.line);
        eng.noqa = !tok.line.is_empty() && has_noqa(&tok.line);
        eng.maybe_check_physical(tok, &prev_physical);
        prev_physical = Arc::clone(&tok.line);
        unit.push(tok.clone());
        match tok.kind {
            TokenKind::Operator => match tok.text.as_str() {
                "(" | "[" | "{" => parens += 1,
                ")" | "]" | "}" => parens -= 1,
                _ => {}
            },
            TokenKind::Newline | TokenKind::Nl if parens == 0 => {
                if tok.kind == TokenKind::Newline {
                    if eng.check_logical(&unit) {
                        unit.clear();
                    }
                    eng.blank_before = 0;
                } else if unit.len() == 1 {
                    eng.blank_lines += 1;
                    unit.clear();
                } else if eng.check_logical(&unit) {
                    unit.clear();
                }
            }
            _ => {}
        }
    }
    if tokenized.aborted {
        let read = match tokenized.errors.last() {
            Some(err) if err.kind == TokenizeErrorKind::Dedent => err.pos.line,
            _ => total,
        };
        eng.read_through(read);
    }
    if !unit.is_empty() {
        let last = eng.lines.last().copied().unwrap_or("");
        eng.check_physical(last);
        eng.check_logical(&unit);
    }
    if tokenized.aborted {
        for ln in 1..=total {
            if !eng.checked[ln - 1] {
                eng.line_number = ln;
                let physical = eng.lines[ln - 1];
                eng.check_physical(physical);
            }
        }
    }
    eng.findings
}
