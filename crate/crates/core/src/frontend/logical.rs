//! Grouping of tokens into logical lines.
//!
//! A logical line ends at a `newline` token outside brackets. Comment-only
//! lines form units with empty text; blank lines form no unit at all and are
//! only counted. The joined text mutes string contents and keeps a mapping
//! from text offsets back to physical positions.

use std::ops::Range;

use super::tokenize::{Pos, Token, TokenKind};

/// How a group of tokens was terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitEnd {
    /// A `newline` token outside brackets.
    Newline,
    /// An `nl` token outside brackets (comment-only line).
    Nl,
    /// End of the token stream.
    Eof,
}

/// A run of tokens that will be checked as one logical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub range: Range<usize>,
    pub end: UnitEnd,
    /// Blank lines seen since the previous unit.
    pub blank_lines: usize,
}

/// Splits a token stream into logical units the way the reference checker
/// does: brackets are counted on operator tokens, lone `nl` tokens are blank
/// lines.
pub fn split_units(tokens: &[Token]) -> Vec<Unit> {
    let mut units = Vec::new();
    let mut parens: i64 = 0;
    let mut start = 0;
    let mut blank = 0;
    for (i, tok) in tokens.iter().enumerate() {
        match tok.kind {
            TokenKind::Operator => match tok.text.as_str() {
                "(" | "[" | "{" => parens += 1,
                ")" | "]" | "}" => parens -= 1,
                _ => {}
            },
            TokenKind::Newline | TokenKind::Nl if parens == 0 => {
                if tok.kind == TokenKind::Newline {
                    units.push(Unit {
                        range: start..i + 1,
                        end: UnitEnd::Newline,
                        blank_lines: blank,
                    });
                    blank = 0;
                } else if i == start {
                    blank += 1;
                } else {
                    units.push(Unit {
                        range: start..i + 1,
                        end: UnitEnd::Nl,
                        blank_lines: blank,
                    });
                    blank = 0;
                }
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < tokens.len() {
        units.push(Unit {
            range: start..tokens.len(),
            end: UnitEnd::Eof,
            blank_lines: blank,
        });
    }
    units
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLine {
    /// Every token of the unit, including comments, `nl`, indents and dedents.
    pub tokens: Vec<Token>,
    /// First and last physical line covered.
    pub physical_span: (usize, usize),
    /// Bracket nesting depth of each token. Brackets sit at their outer depth.
    pub bracket_depth_profile: Vec<usize>,
    /// Joined text with string contents replaced by `x`.
    pub text: String,
    /// `(char offset in text, physical position)`; the first entry is the start
    /// of the first significant token, the rest are token ends.
    pub mapping: Vec<(usize, Pos)>,
    pub comments: Vec<String>,
}

impl LogicalLine {
    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// Physical position of a char offset into `text`.
    pub fn position_of(&self, offset: usize) -> Pos {
        let idx = self
            .mapping
            .partition_point(|(o, _)| *o < offset)
            .min(self.mapping.len().saturating_sub(1));
        let (token_offset, pos) = self.mapping[idx];
        let col = pos.col as i64 + offset as i64 - token_offset as i64;
        Pos::new(pos.line, col.max(0) as usize)
    }
}

/// Replaces string contents with `x`, keeping prefix and quotes.
pub fn mute_string(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let Some(&quote) = chars.last() else {
        return String::new();
    };
    let mut start = chars.iter().position(|&c| c == quote).unwrap_or(0) + 1;
    let mut end = chars.len().saturating_sub(1);
    let tail: String = chars[chars.len().saturating_sub(3)..].iter().collect();
    if chars.len() >= 3 && (tail == "\"\"\"" || tail == "'''") {
        start += 2;
        end = end.saturating_sub(2);
    }
    if start > end {
        return text.to_string();
    }
    let mut out: String = chars[..start].iter().collect();
    out.extend(std::iter::repeat('x').take(end - start));
    out.extend(chars[end..].iter());
    out
}

/// The physical line on which a token ends.
pub fn end_line_text(tok: &Token) -> &str {
    let idx = tok.end.line.saturating_sub(tok.start.line);
    tok.line.split_inclusive('\n').nth(idx).unwrap_or("")
}

fn char_at(line: &str, idx: i64) -> Option<char> {
    if idx >= 0 {
        line.chars().nth(idx as usize)
    } else {
        line.chars().rev().nth((-idx - 1) as usize)
    }
}

fn slice_chars(line: &str, from: usize, to: usize) -> String {
    line.chars()
        .skip(from)
        .take(to.saturating_sub(from))
        .collect()
}

/// Builds the logical line for one unit of tokens.
pub fn build_logical_line(tokens: &[Token]) -> LogicalLine {
    let mut text = String::new();
    let mut length = 0usize;
    let mut mapping: Vec<(usize, Pos)> = Vec::new();
    let mut comments = Vec::new();
    let mut prev: Option<&Token> = None;
    for tok in tokens {
        if matches!(
            tok.kind,
            TokenKind::Newline | TokenKind::Nl | TokenKind::Indent | TokenKind::Dedent
        ) {
            continue;
        }
        if mapping.is_empty() {
            mapping.push((0, tok.start));
        }
        if tok.kind == TokenKind::Comment {
            comments.push(tok.text.clone());
            continue;
        }
        let mut piece = if tok.kind == TokenKind::String {
            mute_string(&tok.text)
        } else {
            tok.text.clone()
        };
        if let Some(p) = prev {
            if p.end.line != tok.start.line {
                let prev_char = char_at(end_line_text(p), p.end.col as i64 - 1);
                let piece_is_closer = "}])".contains(piece.as_str());
                let prev_is_opener = prev_char.is_some_and(|c| "{[(".contains(c));
                if prev_char == Some(',') || (!prev_is_opener && !piece_is_closer) {
                    piece.insert(0, ' ');
                }
            } else if p.end.col != tok.start.col {
                piece = slice_chars(&tok.line, p.end.col, tok.start.col) + &piece;
            }
        }
        length += piece.chars().count();
        text.push_str(&piece);
        mapping.push((length, tok.end));
        prev = Some(tok);
    }

    let mut depth = 0usize;
    let bracket_depth_profile = tokens
        .iter()
        .map(|tok| match (tok.kind, tok.text.as_str()) {
            (TokenKind::Operator, "(" | "[" | "{") => {
                depth += 1;
                depth - 1
            }
            (TokenKind::Operator, ")" | "]" | "}") => {
                depth = depth.saturating_sub(1);
                depth
            }
            _ => depth,
        })
        .collect();

    let physical_span = match (tokens.first(), tokens.last()) {
        (Some(a), Some(b)) => (a.start.line, b.end.line),
        _ => (0, 0),
    };
    LogicalLine {
        tokens: tokens.to_vec(),
        physical_span,
        bracket_depth_profile,
        text,
        mapping,
        comments,
    }
}

/// Logical lines of a token stream. Comment-only and blank lines produce no
/// entry.
pub fn logical_lines(tokens: &[Token]) -> Vec<LogicalLine> {
    split_units(tokens)
        .into_iter()
        .map(|u| build_logical_line(&tokens[u.range]))
        .filter(|l| !l.is_empty())
        .collect()
}
