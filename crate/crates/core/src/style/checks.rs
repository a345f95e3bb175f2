//! Physical-line and logical-line rules.

use std::collections::BTreeMap;

use super::text::*;
use crate::frontend::logical::LogicalLine;
use crate::frontend::tokenize::{Pos, Token, TokenKind};

const INDENT_SIZE: usize = 4;
const TOP_LEVEL_BLANKS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum At {
    /// Char offset into the logical line.
    Offset(usize),
    /// Physical position.
    Pos(Pos),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub at: At,
    pub code: &'static str,
    pub message: String,
}

fn found(out: &mut Vec<Finding>, at: At, code: &'static str, message: impl Into<String>) {
    out.push(Finding {
        at,
        code,
        message: message.into(),
    });
}

// Physical lines.

pub fn maximum_line_length(
    physical: &str,
    max: usize,
    multiline: bool,
    line_number: usize,
    noqa: bool,
) -> Option<(usize, &'static str, String)> {
    let line = rstrip(physical);
    let length = char_len(line);
    if length <= max || noqa {
        return None;
    }
    if line_number == 1 && line.starts_with("#!") {
        return None;
    }
    let chunks: Vec<&str> = line.split(is_space).filter(|c| !c.is_empty()).collect();
    if ((chunks.len() == 1 && multiline) || (chunks.len() == 2 && chunks[0] == "#"))
        && (length - char_len(chunks[chunks.len() - 1])) < max.saturating_sub(7)
    {
        return None;
    }
    Some((
        max,
        "E501",
        format!("line too long ({length} > {max} characters)"),
    ))
}

/// Returns the offset of the first indentation char that differs from the
/// file's indent char.
pub fn mixed_indent(physical: &str, indent_char: Option<char>) -> Option<usize> {
    physical
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .enumerate()
        .find(|(_, c)| Some(*c) != indent_char)
        .map(|(i, _)| i)
}

pub fn trailing_whitespace(physical: &str) -> Option<(usize, &'static str, String)> {
    let line = physical.trim_end_matches(['\n', '\r', '\x0c']);
    let stripped = line.trim_end_matches([' ', '\t', '\x0b']);
    if line == stripped {
        return None;
    }
    if stripped.is_empty() {
        Some((0, "W293", "blank line contains whitespace".into()))
    } else {
        Some((char_len(stripped), "W291", "trailing whitespace".into()))
    }
}

pub fn trailing_blank_lines(
    physical: &str,
    last_line: &str,
    line_number: usize,
    total_lines: usize,
) -> Option<(usize, &'static str, String)> {
    if line_number != total_lines {
        return None;
    }
    let stripped = physical.trim_end_matches(['\r', '\n']);
    if !physical.is_empty() && stripped.is_empty() {
        return None;
    }
    (stripped == physical).then(|| {
        (
            char_len(last_line),
            "W292",
            "no newline at end of file".into(),
        )
    })
}

// Logical lines.

pub struct LogicalContext<'a> {
    pub line: &'a LogicalLine,
    pub lines: &'a [&'a str],
    pub line_number: usize,
    pub indent_level: usize,
    pub indent_char: Option<char>,
    pub previous_logical: &'a str,
    pub blank_lines: usize,
    pub blank_before: usize,
    pub noqa: bool,
}

impl LogicalContext<'_> {
    fn text(&self) -> &str {
        &self.line.text
    }

    fn tokens(&self) -> &[Token] {
        &self.line.tokens
    }

    pub fn run(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        self.blank_lines_rule(&mut out);
        self.compound_statements(&mut out);
        self.continued_indentation(&mut out);
        self.extraneous_whitespace(&mut out);
        self.indentation(&mut out);
        self.missing_whitespace(&mut out);
        self.whitespace_around_named_parameter_equals(&mut out);
        self.whitespace_before_comment(&mut out);
        out
    }

    fn is_one_liner(&self) -> bool {
        if !starts_with_top_level(self.text()) {
            return false;
        }
        let lines = self.lines;
        let mut line_idx = self.line_number as i64 - 1;
        let prev_indent = if line_idx < 1 {
            0
        } else {
            expand_indent(lines[line_idx as usize - 1])
        };
        if prev_indent > self.indent_level {
            return false;
        }
        let line_idx = loop {
            let Some(line) = usize::try_from(line_idx).ok().and_then(|i| lines.get(i)) else {
                return false;
            };
            let line = strip(line);
            if !line.starts_with('@') && starts_with_top_level(line) {
                break line_idx as usize;
            }
            line_idx += 1;
        };
        let mut next_idx = line_idx + 1;
        while next_idx < lines.len() {
            if !strip(lines[next_idx]).is_empty() {
                return expand_indent(lines[next_idx]) <= self.indent_level;
            }
            next_idx += 1;
        }
        true
    }

    fn blank_lines_rule(&self, out: &mut Vec<Finding>) {
        if self.previous_logical.is_empty() && self.blank_before < TOP_LEVEL_BLANKS {
            return;
        }
        if self.previous_logical.starts_with('@') {
            return;
        }
        if self.blank_lines > TOP_LEVEL_BLANKS || (self.indent_level != 0 && self.blank_lines == 2)
        {
            return;
        }
        if !starts_with_top_level(self.text()) {
            return;
        }
        if self.is_one_liner() && self.blank_before == 0 {
            return;
        }
        if self.indent_level == 0 && self.blank_before != TOP_LEVEL_BLANKS {
            found(
                out,
                At::Offset(0),
                "E302",
                format!(
                    "expected {TOP_LEVEL_BLANKS} blank lines, found {}",
                    self.blank_before
                ),
            );
        }
    }

    fn extraneous_whitespace(&self, out: &mut Vec<Finding>) {
        let chars: Vec<char> = self.text().chars().collect();
        let mut i = 0;
        while i + 1 < chars.len() {
            let (a, b) = (chars[i], chars[i + 1]);
            if "[({".contains(a) && (b == ' ' || b == '\t') {
                found(
                    out,
                    At::Offset(i + 1),
                    "E201",
                    format!("whitespace after '{a}'"),
                );
                i += 2;
            } else if (a == ' ' || a == '\t')
                && "]}),;:".contains(b)
                && chars.get(i + 2) != Some(&'=')
            {
                i += 2;
            } else {
                i += 1;
            }
        }
    }

    fn indentation(&self, out: &mut Vec<Finding>) {
        if !self.text().is_empty() && self.indent_level % INDENT_SIZE != 0 {
            found(
                out,
                At::Offset(0),
                "E111",
                format!("indentation is not a multiple of {INDENT_SIZE}"),
            );
        }
    }

    fn continued_indentation(&self, out: &mut Vec<Finding>) {
        let tokens = self.tokens();
        let (Some(first), Some(last)) = (tokens.first(), tokens.last()) else {
            return;
        };
        let first_row = first.start.line;
        let nrows = 1 + last.start.line - first_row;
        if self.noqa || nrows == 1 {
            return;
        }
        let indent_next = self.text().ends_with(':');
        let valid_hangs: &[i64] = if self.indent_char != Some('\t') {
            &[INDENT_SIZE as i64]
        } else {
            &[INDENT_SIZE as i64, 2 * INDENT_SIZE as i64]
        };

        let mut row = 0usize;
        let mut depth = 0usize;
        let mut parens = vec![0i64; nrows];
        let mut rel_indent = vec![0i64; nrows];
        let mut open_rows: Vec<Vec<usize>> = vec![vec![0]];
        let mut hangs: Vec<Option<i64>> = vec![None];
        let mut indent_chances: BTreeMap<usize, Chance> = BTreeMap::new();
        let mut last_indent = first.start;
        let mut last_token_multiline = false;
        let mut indent: Vec<usize> = vec![last_indent.col];
        let mut hang = 0i64;
        let mut hanging_indent = false;

        for tok in tokens {
            let text = tok.text.as_str();
            let (start, end) = (tok.start, tok.end);
            let mut newline = row < start.line - first_row;
            if newline {
                row = start.line - first_row;
                newline = !last_token_multiline
                    && !matches!(tok.kind, TokenKind::Nl | TokenKind::Newline);
            }

            if newline {
                last_indent = start;
                rel_indent[row] = expand_indent(&tok.line) as i64 - self.indent_level as i64;
                let close_bracket = tok.kind == TokenKind::Operator && "]})".contains(text);
                for &open_row in open_rows[depth].iter().rev() {
                    hang = rel_indent[row] - rel_indent[open_row];
                    hanging_indent = valid_hangs.contains(&hang);
                    if hanging_indent {
                        break;
                    }
                }
                if let Some(h) = hangs[depth].filter(|h| *h != 0) {
                    hanging_indent = hang == h;
                }
                let visual_indent = if !close_bracket && hang > 0 {
                    indent_chances.get(&start.col).cloned()
                } else {
                    None
                };

                if close_bracket && indent[depth] != 0 {
                } else if close_bracket && hang == 0 {
                } else if indent[depth] != 0 && start.col < indent[depth] {
                    if visual_indent != Some(Chance::Visual) {
                        found(
                            out,
                            At::Pos(start),
                            "E128",
                            "continuation line under-indented for visual indent",
                        );
                    }
                } else if hanging_indent
                    || (indent_next && rel_indent[row] == 2 * INDENT_SIZE as i64)
                {
                    hangs[depth] = Some(hang);
                } else if visual_indent == Some(Chance::Visual) {
                    indent[depth] = start.col;
                } else if matches!(&visual_indent, Some(Chance::Str))
                    || matches!(&visual_indent, Some(Chance::Text(t)) if t == text)
                {
                } else if hang > 0
                    && indent[depth] == 0
                    && (close_bracket || hangs[depth].unwrap_or(0) == 0)
                {
                    hangs[depth] = Some(hang);
                }
            }

            let rest_of_line = tail_chars(&tok.line, end.col);
            if parens[row] != 0
                && !matches!(tok.kind, TokenKind::Nl | TokenKind::Comment)
                && indent[depth] == 0
            {
                indent[depth] = start.col;
                indent_chances.insert(start.col, Chance::Visual);
            } else if matches!(tok.kind, TokenKind::String | TokenKind::Comment) {
                indent_chances.insert(start.col, Chance::Str);
            } else if row == 0 && depth == 0 && ["assert", "raise", "with"].contains(&text) {
                indent_chances.insert(end.col + 1, Chance::Visual);
            } else if indent_chances.is_empty() && row == 0 && depth == 0 && text == "if" {
                indent_chances.insert(end.col + 1, Chance::Visual);
            } else if text == ":" && !rest_of_line.is_empty() && rest_of_line.chars().all(is_space)
            {
                open_rows[depth].push(row);
            }

            if tok.kind == TokenKind::Operator {
                if ["(", "[", "{"].contains(&text) {
                    depth += 1;
                    indent.push(0);
                    hangs.push(None);
                    if open_rows.len() == depth {
                        open_rows.push(Vec::new());
                    }
                    open_rows[depth].push(row);
                    parens[row] += 1;
                } else if [")", "]", "}"].contains(&text) && depth > 0 {
                    let popped = indent.pop().unwrap_or(0);
                    let prev_indent = if popped != 0 { popped } else { last_indent.col };
                    hangs.pop();
                    for d in indent.iter_mut().take(depth) {
                        if *d > prev_indent {
                            *d = 0;
                        }
                    }
                    indent_chances.retain(|&k, _| k < prev_indent);
                    open_rows.truncate(depth + 1);
                    depth -= 1;
                    if depth != 0 {
                        indent_chances.insert(indent[depth], Chance::Visual);
                    }
                    for idx in (0..=row).rev() {
                        if parens[idx] != 0 {
                            parens[idx] -= 1;
                            break;
                        }
                    }
                }
                indent_chances
                    .entry(start.col)
                    .or_insert_with(|| Chance::Text(text.to_string()));
            }

            last_token_multiline = start.line != end.line;
            if last_token_multiline {
                let current = rel_indent[row];
                if let Some(slot) = rel_indent.get_mut(end.line - first_row) {
                    *slot = current;
                }
            }
        }
    }

    fn missing_whitespace(&self, out: &mut Vec<Finding>) {
        let mut need_space = Need::No;
        let mut prev_type = TokenKind::Operator;
        let mut prev_text: &str = "";
        let mut prev_end: Option<Pos> = None;
        let mut brace_stack: Vec<char> = Vec::new();

        for tok in self.tokens() {
            let text = tok.text.as_str();
            let is_op = tok.kind == TokenKind::Operator;
            if is_op && ["[", "(", "{"].contains(&text) {
                brace_stack.push(text.chars().next().unwrap_or('('));
            } else if tok.kind == TokenKind::Name && text == "lambda" {
                brace_stack.push('l');
            } else if !brace_stack.is_empty() {
                if is_op && ["]", ")", "}"].contains(&text) {
                    brace_stack.pop();
                } else if brace_stack.last() == Some(&'l') && is_op && text == ":" {
                    brace_stack.pop();
                }
            }

            if matches!(
                tok.kind,
                TokenKind::Nl
                    | TokenKind::Newline
                    | TokenKind::Indent
                    | TokenKind::Dedent
                    | TokenKind::Comment
                    | TokenKind::Error
            ) {
                continue;
            }

            if is_op && [",", ";", ":"].contains(&text) {
                let next_char = tail_chars(&tok.line, tok.end.col).chars().next();
                if let Some(c) = next_char.filter(|c| !" \t\u{a0}\r\n".contains(*c)) {
                    let slice = text == ":" && brace_stack.last() == Some(&'[');
                    let tuple = text == "," && (c == ')' || c == ']');
                    if !slice && !tuple {
                        found(
                            out,
                            At::Pos(tok.start),
                            "E231",
                            format!("missing whitespace after '{text}'"),
                        );
                    }
                }
            }

            let adjacent = prev_end == Some(tok.start);
            match need_space {
                Need::Yes | Need::Optional(..) => {
                    if !adjacent {
                        if let Need::Optional(at, false) = need_space {
                            found(
                                out,
                                At::Pos(at),
                                "E225",
                                "missing whitespace around operator",
                            );
                        }
                        need_space = Need::No;
                    } else if (prev_text == "/" && [",", ")", ":"].contains(&text))
                        || (prev_text == ")" && text == ":")
                    {
                    } else {
                        if matches!(need_space, Need::Yes | Need::Optional(_, true)) {
                            if let Some(at) = prev_end {
                                found(
                                    out,
                                    At::Pos(at),
                                    "E225",
                                    "missing whitespace around operator",
                                );
                            }
                        }
                        need_space = Need::No;
                    }
                }
                Need::No => {
                    if let (true, Some(pe)) = (is_op || tok.kind == TokenKind::Name, prev_end) {
                        let top = brace_stack.last().copied();
                        let mut optional = false;
                        if text == "=" && (top == Some('l') || top == Some('(')) {
                        } else if WS_NEEDED.contains(&text) {
                            need_space = Need::Yes;
                        } else if UNARY.contains(&text) {
                            let binary = (prev_type == TokenKind::Operator
                                && "}])".contains(prev_text))
                                || (prev_type != TokenKind::Operator
                                    && !KEYWORDS.contains(&prev_text)
                                    && !SOFT_KEYWORDS.contains(&prev_text));
                            optional = binary;
                        } else if WS_OPTIONAL.contains(&text) {
                            optional = true;
                        }
                        if optional {
                            need_space = Need::Optional(pe, !adjacent);
                        } else if need_space == Need::Yes && adjacent {
                            found(
                                out,
                                At::Pos(pe),
                                "E225",
                                "missing whitespace around operator",
                            );
                            need_space = Need::No;
                        }
                    }
                }
            }
            prev_type = tok.kind;
            prev_text = text;
            prev_end = Some(tok.end);
        }
    }

    fn whitespace_around_named_parameter_equals(&self, out: &mut Vec<Finding>) {
        let mut paren_stack: Vec<&str> = Vec::new();
        let mut no_space = false;
        let mut require_space = false;
        let mut prev_end: Option<Pos> = None;
        let mut annotated_func_arg = false;
        let in_def = starts_with_def(self.text());
        let in_generic = starts_with_generic(self.text());
        let message = "unexpected spaces around keyword / parameter equals";

        for tok in self.tokens() {
            if tok.kind == TokenKind::Nl {
                continue;
            }
            let text = tok.text.as_str();
            if no_space {
                no_space = false;
                if Some(tok.start) != prev_end {
                    found(out, At::Pos(prev_end.unwrap_or_default()), "E251", message);
                }
            }
            if require_space {
                require_space = false;
            }
            if tok.kind == TokenKind::Operator {
                if text == "(" || text == "[" {
                    paren_stack.push(text);
                } else if (text == ")" || text == "]") && !paren_stack.is_empty() {
                    paren_stack.pop();
                } else if text == ":" && in_def && paren_stack == ["("] {
                    annotated_func_arg = true;
                } else if paren_stack.len() == 1 && text == "," {
                    annotated_func_arg = false;
                } else if !paren_stack.is_empty() && text == "=" {
                    if (in_generic && paren_stack == ["["])
                        || (annotated_func_arg && paren_stack == ["("])
                    {
                        require_space = true;
                    } else {
                        no_space = true;
                        if Some(tok.start) != prev_end {
                            found(out, At::Pos(prev_end.unwrap_or_default()), "E251", message);
                        }
                    }
                }
                if paren_stack.is_empty() {
                    annotated_func_arg = false;
                }
            }
            prev_end = Some(tok.end);
        }
    }

    fn whitespace_before_comment(&self, out: &mut Vec<Finding>) {
        let mut prev_end = Pos::new(0, 0);
        for tok in self.tokens() {
            if tok.kind == TokenKind::Comment {
                let inline_comment = !strip(head_chars(&tok.line, tok.start.col)).is_empty();
                if inline_comment
                    && prev_end.line == tok.start.line
                    && tok.start.col < prev_end.col + 2
                {
                    found(
                        out,
                        At::Pos(prev_end),
                        "E261",
                        "at least two spaces before inline comment",
                    );
                }
                let symbol = tok
                    .text
                    .split_once(' ')
                    .map_or(tok.text.as_str(), |(s, _)| s);
                let bad_prefix = if "#:".contains(symbol) {
                    None
                } else {
                    Some(symbol.trim_start_matches('#').chars().next().unwrap_or('#'))
                };
                if !inline_comment {
                    if let Some(bad) = bad_prefix {
                        if (bad != '!' || tok.start.line > 1) && bad != '#' {
                            found(
                                out,
                                At::Pos(tok.start),
                                "E265",
                                "block comment should start with '# '",
                            );
                        }
                    }
                }
            } else if tok.kind != TokenKind::Nl {
                prev_end = tok.end;
            }
        }
    }

    fn compound_statements(&self, out: &mut Vec<Finding>) {
        let text = self.text();
        if text.ends_with(';') {
            found(
                out,
                At::Offset(char_len(text) - 1),
                "E703",
                "statement ends with a semicolon",
            );
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Chance {
    Visual,
    Str,
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Need {
    No,
    Yes,
    Optional(Pos, bool),
}

const WS_NEEDED: [&str; 25] = [
    "**=", "*=", "/=", "//=", "+=", "-=", "!=", "<", ">", "%=", "^=", "&=", "|=", "==", "<=", ">=",
    "<<=", ">>=", "=", "and", "in", "is", "or", "->", ":=",
];
const UNARY: [&str; 5] = [">>", "**", "*", "+", "-"];
const WS_OPTIONAL: [&str; 13] = [
    "**", "*", "/", "//", "+", "-", "@", "^", "&", "|", "<<", ">>", "%",
];
const KEYWORDS: [&str; 33] = [
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield", "print",
];
const SOFT_KEYWORDS: [&str; 3] = ["_", "case", "match"];
