//! Python tokenizer.
//!
//! Mirrors the token stream of CPython 3.10's `tokenize` module: comments and
//! non-logical newlines (`Nl`) are kept, f-strings are single string tokens,
//! and malformed input produces `Error` tokens rather than aborting. Columns
//! count characters, not bytes.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::notebook::PythonSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Name,
    Number,
    String,
    Operator,
    Comment,
    Indent,
    Dedent,
    Newline,
    Nl,
    Error,
    End,
}

/// A position in the source: 1-based line, 0-based character column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub const fn new(line: usize, col: usize) -> Pos {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub start: Pos,
    pub end: Pos,
    /// Physical line(s) the token was read from, terminators included.
    pub line: Arc<str>,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizeErrorKind {
    /// A stray character or unterminated single-quoted string.
    BadToken,
    UnterminatedString,
    UnclosedBracket,
    Dedent,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at line {}, column {}", .pos.line, .pos.col + 1)]
pub struct TokenizeError {
    pub kind: TokenizeErrorKind,
    pub pos: Pos,
    pub message: String,
}

/// Tokenizer output: every token produced before the first fatal error, plus
/// the errors encountered (recoverable `Error` tokens included).
#[derive(Debug, Clone, Default)]
pub struct Tokenized {
    pub tokens: Vec<Token>,
    pub errors: Vec<TokenizeError>,
    /// True when tokenization stopped early.
    pub aborted: bool,
}

/// Tokenizes a source, failing on the first problem.
pub fn tokenize(src: &PythonSource) -> Result<Vec<Token>, TokenizeError> {
    let out = tokenize_text(&src.text);
    match out.errors.into_iter().next() {
        Some(err) => Err(err),
        None => Ok(out.tokens),
    }
}

/// Splits text into physical lines the way `readlines()` does.
pub fn physical_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

/// Tokenizes text, recovering where CPython's tokenizer recovers.
pub fn tokenize_text(text: &str) -> Tokenized {
    let lines: Vec<Arc<str>> = physical_lines(text).into_iter().map(Arc::from).collect();
    Tokenizer::new(lines).run()
}

const OPERATORS: &[&str] = &[
    "!=", "%", "%=", "&", "&=", "(", ")", "*", "**", "**=", "*=", "+", "+=", ",", "-", "-=", "->",
    ".", "...", "/", "//", "//=", "/=", ":", ":=", ";", "<", "<<", "<<=", "<=", "=", "==", ">",
    ">=", ">>", ">>=", "@", "@=", "[", "]", "^", "^=", "{", "|", "|=", "}", "~",
];

const TABSIZE: usize = 8;

struct ContinuedString {
    text: String,
    start: Pos,
    contline: String,
    quote: char,
    triple: bool,
    needcont: bool,
}

struct Tokenizer {
    lines: Vec<Arc<str>>,
    tokens: Vec<Token>,
    errors: Vec<TokenizeError>,
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_identifier_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

/// Length of a string prefix (`r`, `b`, `f`, `u`, `br`, `rb`, `fr`, `rf`, any
/// case) at `at`, if followed by a quote.
fn string_prefix_len(chars: &[char], at: usize) -> Option<usize> {
    let mut prefix = String::new();
    let mut i = at;
    while i < chars.len() && i - at < 2 && chars[i].is_ascii_alphabetic() {
        prefix.push(chars[i].to_ascii_lowercase());
        i += 1;
    }
    // Try the longest prefix first, then shorter ones.
    for len in (0..=prefix.len()).rev() {
        let p = &prefix[..len];
        let valid = matches!(p, "" | "b" | "r" | "u" | "f" | "br" | "rb" | "fr" | "rf");
        if valid && matches!(chars.get(at + len), Some('\'') | Some('"')) {
            return Some(len);
        }
    }
    None
}

fn digits(chars: &[char], mut i: usize) -> Option<usize> {
    // [0-9](?:_?[0-9])*
    if !chars.get(i).is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    i += 1;
    loop {
        match chars.get(i) {
            Some(c) if c.is_ascii_digit() => i += 1,
            Some('_') if chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) => i += 2,
            _ => return Some(i),
        }
    }
}

fn radix_digits(chars: &[char], mut i: usize, ok: fn(char) -> bool) -> Option<usize> {
    // (?:_?[digit])+
    let start = i;
    loop {
        match chars.get(i) {
            Some(&c) if ok(c) => i += 1,
            Some('_') if chars.get(i + 1).is_some_and(|&c| ok(c)) => i += 2,
            _ => break,
        }
    }
    (i > start).then_some(i)
}

fn exponent(chars: &[char], i: usize) -> Option<usize> {
    if !matches!(chars.get(i), Some('e') | Some('E')) {
        return None;
    }
    let mut j = i + 1;
    if matches!(chars.get(j), Some('+') | Some('-')) {
        j += 1;
    }
    digits(chars, j)
}

fn point_float(chars: &[char], i: usize) -> Option<usize> {
    let base = if let Some(j) = digits(chars, i) {
        if chars.get(j) != Some(&'.') {
            return None;
        }
        digits(chars, j + 1).unwrap_or(j + 1)
    } else if chars.get(i) == Some(&'.') {
        digits(chars, i + 1)?
    } else {
        return None;
    };
    Some(exponent(chars, base).unwrap_or(base))
}

fn float_number(chars: &[char], i: usize) -> Option<usize> {
    point_float(chars, i).or_else(|| digits(chars, i).and_then(|j| exponent(chars, j)))
}

fn int_number(chars: &[char], i: usize) -> Option<usize> {
    if chars.get(i) == Some(&'0') {
        match chars.get(i + 1) {
            Some('x') | Some('X') => {
                if let Some(j) = radix_digits(chars, i + 2, |c| c.is_ascii_hexdigit()) {
                    return Some(j);
                }
            }
            Some('b') | Some('B') => {
                if let Some(j) = radix_digits(chars, i + 2, |c| c == '0' || c == '1') {
                    return Some(j);
                }
            }
            Some('o') | Some('O') => {
                if let Some(j) = radix_digits(chars, i + 2, |c| ('0'..='7').contains(&c)) {
                    return Some(j);
                }
            }
            _ => {}
        }
        // 0(?:_?0)*
        let mut j = i + 1;
        loop {
            match chars.get(j) {
                Some('0') => j += 1,
                Some('_') if chars.get(j + 1) == Some(&'0') => j += 2,
                _ => return Some(j),
            }
        }
    }
    if chars.get(i).is_some_and(|c| ('1'..='9').contains(c)) {
        return digits(chars, i);
    }
    None
}

/// Number literal at `i`, using the same alternative order as CPython's
/// pattern: imaginary, float, then integer.
fn number(chars: &[char], i: usize) -> Option<usize> {
    let imag_of = |j: usize| matches!(chars.get(j), Some('j') | Some('J')).then_some(j + 1);
    if let Some(j) = digits(chars, i).and_then(imag_of) {
        return Some(j);
    }
    if let Some(j) = float_number(chars, i).and_then(imag_of) {
        return Some(j);
    }
    float_number(chars, i).or_else(|| int_number(chars, i))
}

fn operator(chars: &[char], i: usize) -> Option<usize> {
    let mut best = None;
    for op in OPERATORS {
        let n = op.chars().count();
        if i + n <= chars.len() && op.chars().zip(&chars[i..i + n]).all(|(a, &b)| a == b) {
            if best.is_none_or(|b| n > b) {
                best = Some(n);
            }
        }
    }
    best.map(|n| i + n)
}

/// Single-line string body after the opening quote: ends at the closing
/// quote, or at a backslash-newline (continued string).
fn single_quoted_end(chars: &[char], mut i: usize, quote: char) -> Option<usize> {
    while i < chars.len() {
        match chars[i] {
            '\n' => return None,
            '\\' => match chars.get(i + 1) {
                Some('\n') => return Some(i + 2),
                Some('\r') if chars.get(i + 2) == Some(&'\n') => return Some(i + 3),
                Some(_) => i += 2,
                None => return None,
            },
            c if c == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

/// Searches a line for the end of a string body. Escapes skip the next
/// character, except that a backslash before a newline ends the search.
fn string_end(chars: &[char], mut i: usize, quote: char, triple: bool) -> Option<usize> {
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            match chars.get(i + 1) {
                Some('\n') | None => return None,
                Some(_) => i += 2,
            }
            continue;
        }
        if c == quote {
            if !triple {
                return Some(i + 1);
            }
            if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                return Some(i + 3);
            }
        }
        i += 1;
    }
    None
}

fn collect(chars: &[char], a: usize, b: usize) -> String {
    chars[a..b].iter().collect()
}

impl Tokenizer {
    fn new(lines: Vec<Arc<str>>) -> Tokenizer {
        Tokenizer {
            lines,
            tokens: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn push(&mut self, kind: TokenKind, text: String, start: Pos, end: Pos, line: &Arc<str>) {
        self.tokens.push(Token {
            kind,
            text,
            start,
            end,
            line: Arc::clone(line),
        });
    }

    fn fatal(mut self, kind: TokenizeErrorKind, pos: Pos, message: &str) -> Tokenized {
        self.errors.push(TokenizeError {
            kind,
            pos,
            message: message.to_string(),
        });
        Tokenized {
            tokens: self.tokens,
            errors: self.errors,
            aborted: true,
        }
    }

    fn run(mut self) -> Tokenized {
        let empty: Arc<str> = Arc::from("");
        let mut lnum = 0usize;
        let mut parenlev = 0i64;
        let mut continued = false;
        let mut indents = vec![0usize];
        let mut contstr: Option<ContinuedString> = None;
        let mut line: Arc<str> = Arc::clone(&empty);
        let mut last_line: Arc<str>;

        loop {
            last_line = std::mem::replace(&mut line, Arc::clone(&empty));
            if lnum < self.lines.len() {
                line = Arc::clone(&self.lines[lnum]);
            }
            lnum += 1;
            let chars: Vec<char> = line.chars().collect();
            let max = chars.len();
            let mut pos = 0usize;

            if let Some(mut cs) = contstr.take() {
                if line.is_empty() {
                    return self.fatal(
                        TokenizeErrorKind::UnterminatedString,
                        cs.start,
                        "EOF in multi-line string",
                    );
                }
                match string_end(&chars, 0, cs.quote, cs.triple) {
                    Some(end) => {
                        pos = end;
                        let text = cs.text + &collect(&chars, 0, end);
                        let full: Arc<str> = Arc::from(cs.contline + &line);
                        self.push(
                            TokenKind::String,
                            text,
                            cs.start,
                            Pos::new(lnum, end),
                            &full,
                        );
                    }
                    None if cs.needcont && !line.ends_with("\\\n") && !line.ends_with("\\\r\n") => {
                        let text = cs.text + &line;
                        let contline: Arc<str> = Arc::from(cs.contline);
                        self.errors.push(TokenizeError {
                            kind: TokenizeErrorKind::UnterminatedString,
                            pos: cs.start,
                            message: "unterminated string literal".into(),
                        });
                        self.push(
                            TokenKind::Error,
                            text,
                            cs.start,
                            Pos::new(lnum, max),
                            &contline,
                        );
                        continue;
                    }
                    None => {
                        cs.text.push_str(&line);
                        cs.contline.push_str(&line);
                        contstr = Some(cs);
                        continue;
                    }
                }
            } else if parenlev == 0 && !continued {
                if line.is_empty() {
                    break;
                }
                let mut column = 0usize;
                while pos < max {
                    match chars[pos] {
                        ' ' => column += 1,
                        '\t' => column = (column / TABSIZE + 1) * TABSIZE,
                        '\x0c' => column = 0,
                        _ => break,
                    }
                    pos += 1;
                }
                if pos == max {
                    break;
                }
                let c = chars[pos];
                if c == '#' || c == '\r' || c == '\n' {
                    if c == '#' {
                        let mut end = max;
                        while end > pos && matches!(chars[end - 1], '\r' | '\n') {
                            end -= 1;
                        }
                        self.push(
                            TokenKind::Comment,
                            collect(&chars, pos, end),
                            Pos::new(lnum, pos),
                            Pos::new(lnum, end),
                            &line,
                        );
                        pos = end;
                    }
                    self.push(
                        TokenKind::Nl,
                        collect(&chars, pos, max),
                        Pos::new(lnum, pos),
                        Pos::new(lnum, max),
                        &line,
                    );
                    continue;
                }
                if column > *indents.last().unwrap() {
                    indents.push(column);
                    self.push(
                        TokenKind::Indent,
                        collect(&chars, 0, pos),
                        Pos::new(lnum, 0),
                        Pos::new(lnum, pos),
                        &line,
                    );
                }
                while column < *indents.last().unwrap() {
                    if !indents.contains(&column) {
                        return self.fatal(
                            TokenizeErrorKind::Dedent,
                            Pos::new(lnum, pos),
                            "unindent does not match any outer indentation level",
                        );
                    }
                    indents.pop();
                    self.push(
                        TokenKind::Dedent,
                        String::new(),
                        Pos::new(lnum, pos),
                        Pos::new(lnum, pos),
                        &line,
                    );
                }
            } else {
                if line.is_empty() {
                    return self.fatal(
                        TokenizeErrorKind::UnclosedBracket,
                        Pos::new(lnum, 0),
                        "EOF in multi-line statement",
                    );
                }
                continued = false;
            }

            while pos < max {
                let mut start = pos;
                while start < max && matches!(chars[start], ' ' | '\x0c' | '\t') {
                    start += 1;
                }
                if start == max {
                    pos = max;
                    continue;
                }
                let c = chars[start];
                let spos = Pos::new(lnum, start);

                // Line continuation.
                if c == '\\' {
                    let end = match (chars.get(start + 1), chars.get(start + 2)) {
                        (Some('\n'), _) => Some(start + 2),
                        (Some('\r'), Some('\n')) => Some(start + 3),
                        _ => None,
                    };
                    if let Some(end) = end {
                        continued = true;
                        pos = end;
                        continue;
                    }
                }
                if c == '#' {
                    let mut end = start;
                    while end < max && !matches!(chars[end], '\r' | '\n') {
                        end += 1;
                    }
                    self.push(
                        TokenKind::Comment,
                        collect(&chars, start, end),
                        spos,
                        Pos::new(lnum, end),
                        &line,
                    );
                    pos = end;
                    continue;
                }
                if let Some(plen) = string_prefix_len(&chars, start) {
                    let q = chars[start + plen];
                    if chars.get(start + plen + 1) == Some(&q)
                        && chars.get(start + plen + 2) == Some(&q)
                    {
                        let body = start + plen + 3;
                        match string_end(&chars, body, q, true) {
                            Some(end) => {
                                self.push(
                                    TokenKind::String,
                                    collect(&chars, start, end),
                                    spos,
                                    Pos::new(lnum, end),
                                    &line,
                                );
                                pos = end;
                            }
                            None => {
                                contstr = Some(ContinuedString {
                                    text: collect(&chars, start, max),
                                    start: spos,
                                    contline: line.to_string(),
                                    quote: q,
                                    triple: true,
                                    needcont: false,
                                });
                                break;
                            }
                        }
                        continue;
                    }
                }
                if let Some(end) = number(&chars, start) {
                    self.push(
                        TokenKind::Number,
                        collect(&chars, start, end),
                        spos,
                        Pos::new(lnum, end),
                        &line,
                    );
                    pos = end;
                    continue;
                }
                if c == '\n' || (c == '\r' && chars.get(start + 1) == Some(&'\n')) {
                    let end = if c == '\n' { start + 1 } else { start + 2 };
                    let kind = if parenlev > 0 {
                        TokenKind::Nl
                    } else {
                        TokenKind::Newline
                    };
                    self.push(
                        kind,
                        collect(&chars, start, end),
                        spos,
                        Pos::new(lnum, end),
                        &line,
                    );
                    pos = end;
                    continue;
                }
                if let Some(end) = operator(&chars, start) {
                    let text = collect(&chars, start, end);
                    match c {
                        '(' | '[' | '{' => parenlev += 1,
                        ')' | ']' | '}' => parenlev -= 1,
                        _ => {}
                    }
                    self.push(TokenKind::Operator, text, spos, Pos::new(lnum, end), &line);
                    pos = end;
                    continue;
                }
                if let Some(plen) = string_prefix_len(&chars, start) {
                    let q = chars[start + plen];
                    if let Some(end) = single_quoted_end(&chars, start + plen + 1, q) {
                        let text = collect(&chars, start, end);
                        if text.ends_with('\n') {
                            contstr = Some(ContinuedString {
                                text: collect(&chars, start, max),
                                start: spos,
                                contline: line.to_string(),
                                quote: q,
                                triple: false,
                                needcont: true,
                            });
                            break;
                        }
                        self.push(TokenKind::String, text, spos, Pos::new(lnum, end), &line);
                        pos = end;
                        continue;
                    }
                }
                if is_word(c) {
                    let mut end = start;
                    while end < max && is_word(chars[end]) {
                        end += 1;
                    }
                    let text = collect(&chars, start, end);
                    if is_identifier_start(c) {
                        self.push(TokenKind::Name, text, spos, Pos::new(lnum, end), &line);
                    } else {
                        self.push(TokenKind::Operator, text, spos, Pos::new(lnum, end), &line);
                    }
                    pos = end;
                    continue;
                }
                // Nothing matched: the character at `pos` (possibly
                // whitespace) becomes an error token.
                let bad = chars[pos];
                self.errors.push(TokenizeError {
                    kind: TokenizeErrorKind::BadToken,
                    pos: Pos::new(lnum, pos),
                    message: if bad == '\'' || bad == '"' {
                        "unterminated string literal".to_string()
                    } else {
                        format!("unexpected character {bad:?}")
                    },
                });
                self.push(
                    TokenKind::Error,
                    bad.to_string(),
                    Pos::new(lnum, pos),
                    Pos::new(lnum, pos + 1),
                    &line,
                );
                pos += 1;
            }
        }

        if !last_line.is_empty()
            && !last_line.ends_with(['\r', '\n'])
            && !last_line.trim().starts_with('#')
        {
            let n = last_line.chars().count();
            self.push(
                TokenKind::Newline,
                String::new(),
                Pos::new(lnum - 1, n),
                Pos::new(lnum - 1, n + 1),
                &empty,
            );
        }
        for _ in 1..indents.len() {
            self.push(
                TokenKind::Dedent,
                String::new(),
                Pos::new(lnum, 0),
                Pos::new(lnum, 0),
                &empty,
            );
        }
        self.push(
            TokenKind::End,
            String::new(),
            Pos::new(lnum, 0),
            Pos::new(lnum, 0),
            &empty,
        );
        Tokenized {
            tokens: self.tokens,
            errors: self.errors,
            aborted: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(TokenKind, String)> {
        tokenize_text(text)
            .tokens
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    fn k(kind: TokenKind, text: &str) -> (TokenKind, String) {
        (kind, text.to_string())
    }

    #[test]
    fn simple_assignment() {
        use TokenKind::*;
        assert_eq!(
            kinds("x = 1"),
            vec![
                k(Name, "x"),
                k(Operator, "="),
                k(Number, "1"),
                k(Newline, ""),
                k(End, "")
            ]
        );
    }

    #[test]
    fn empty_source() {
        assert_eq!(kinds(""), vec![k(TokenKind::End, "")]);
    }

    #[test]
    fn unterminated_string_is_an_error() {
        let src = PythonSource::from_script("s.py", "s = 'abc");
        let err = tokenize(&src).unwrap_err();
        assert_eq!(err.pos.line, 1);
        let out = tokenize_text("s = 'abc");
        assert!(!out.aborted);
        assert!(out.tokens.iter().any(|t| t.is(TokenKind::Error, "'")));
    }

    #[test]
    fn indentation_tokens() {
        let toks = tokenize_text("if x:\n    y = 1\nz = 2\n").tokens;
        let seq: Vec<_> = toks.iter().map(|t| t.kind).collect();
        use TokenKind::*;
        assert_eq!(
            seq,
            vec![
                Name, Name, Operator, Newline, Indent, Name, Operator, Number, Newline, Dedent,
                Name, Operator, Number, Newline, End
            ]
        );
    }

    #[test]
    fn bad_dedent_aborts() {
        let out = tokenize_text("if x:\n    y = 1\n  z = 2\n");
        assert!(out.aborted);
        assert_eq!(out.errors[0].kind, TokenizeErrorKind::Dedent);
    }

    #[test]
    fn nl_inside_brackets_and_comments() {
        use TokenKind::*;
        let toks = kinds("f(1,\n  2)  # c\n");
        assert_eq!(
            toks,
            vec![
                k(Name, "f"),
                k(Operator, "("),
                k(Number, "1"),
                k(Operator, ","),
                k(Nl, "\n"),
                k(Number, "2"),
                k(Operator, ")"),
                k(Comment, "# c"),
                k(Newline, "\n"),
                k(End, "")
            ]
        );
    }

    #[test]
    fn numbers() {
        for n in [
            "0", "10", "1_000", "0x_ff", "0b101", "0o17", "1.5", ".5", "1.", "1e10", "1.5e-3",
            "3j", "1.5J", "00",
        ] {
            let toks = kinds(n);
            assert_eq!(toks[0], k(TokenKind::Number, n), "{n}");
        }
    }

    #[test]
    fn strings_with_prefixes_and_triples() {
        let toks = tokenize_text("a = rb'x' + f\"{y}\"\nb = '''one\ntwo''' + 1\n").tokens;
        let strings: Vec<_> = toks
            .iter()
            .filter(|t| t.kind == TokenKind::String)
            .map(|t| t.text.as_str())
            .collect();
        assert_eq!(strings, vec!["rb'x'", "f\"{y}\"", "'''one\ntwo'''"]);
        let triple = toks.iter().find(|t| t.text.starts_with("'''")).unwrap();
        assert_eq!(triple.start, Pos::new(2, 4));
        assert_eq!(triple.end, Pos::new(3, 6));
        assert_eq!(&*triple.line, "b = '''one\ntwo''' + 1\n");
    }

    #[test]
    fn unclosed_bracket_aborts() {
        let out = tokenize_text("x = (1,\n");
        assert!(out.aborted);
        assert_eq!(out.errors[0].kind, TokenizeErrorKind::UnclosedBracket);
    }

    #[test]
    fn operators_longest_match() {
        let ops: Vec<_> = tokenize_text("a **= b // c -> d ... e != f\n")
            .tokens
            .into_iter()
            .filter(|t| t.kind == TokenKind::Operator)
            .map(|t| t.text)
            .collect();
        assert_eq!(ops, vec!["**=", "//", "->", "...", "!="]);
    }

    #[test]
    fn unicode_columns_are_characters() {
        let toks = tokenize_text("s = 'é' + x\n").tokens;
        let x = toks.iter().find(|t| t.text == "x").unwrap();
        assert_eq!(x.start.col, 10);
    }
}
