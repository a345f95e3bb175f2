//! String helpers with Python `str` semantics.

pub fn is_space(c: char) -> bool {
    c.is_whitespace() || ('\x1c'..='\x1f').contains(&c)
}

pub fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn strip(s: &str) -> &str {
    s.trim_matches(is_space)
}

pub fn lstrip(s: &str) -> &str {
    s.trim_start_matches(is_space)
}

pub fn rstrip(s: &str) -> &str {
    s.trim_end_matches(is_space)
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Chars `from..` of a string.
pub fn tail_chars(s: &str, from: usize) -> &str {
    match s.char_indices().nth(from) {
        Some((i, _)) => &s[i..],
        None => "",
    }
}

/// Chars `..to` of a string.
pub fn head_chars(s: &str, to: usize) -> &str {
    match s.char_indices().nth(to) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Indentation width with tabs expanded to the next multiple of eight.
pub fn expand_indent(line: &str) -> usize {
    let line = line.trim_end_matches(['\n', '\r']);
    if !line.contains('\t') {
        return char_len(line) - char_len(lstrip(line));
    }
    let mut result = 0;
    for c in line.chars() {
        match c {
            '\t' => result = result / 8 * 8 + 8,
            ' ' => result += 1,
            _ => break,
        }
    }
    result
}

/// `# noqa` or `# nopep8` anywhere, case-insensitive, ending at a word boundary.
pub fn has_noqa(s: &str) -> bool {
    let lower = s.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let n = chars.len();
    for i in 0..n {
        if !(chars[i] == '#'
            && chars.get(i + 1) == Some(&' ')
            && chars.get(i + 2) == Some(&'n')
            && chars.get(i + 3) == Some(&'o'))
        {
            continue;
        }
        for word in ["qa", "pep8"] {
            let w: Vec<char> = word.chars().collect();
            let end = i + 4 + w.len();
            if end <= n
                && chars[i + 4..end] == w[..]
                && chars.get(end).map_or(true, |&c| !is_word(c))
            {
                return true;
            }
        }
    }
    false
}

fn after_keyword<'a>(s: &'a str, kw: &str) -> Option<&'a str> {
    let rest = s.strip_prefix(kw)?;
    Some(rest)
}

fn skip_spaces1(s: &str) -> Option<&str> {
    let t = lstrip(s);
    (t.len() < s.len()).then_some(t)
}

/// `^(async\s+def\s+|def\s+|class\s+|@)`
pub fn starts_with_top_level(s: &str) -> bool {
    if s.starts_with('@') {
        return true;
    }
    if let Some(rest) = after_keyword(s, "async")
        .and_then(skip_spaces1)
        .and_then(|r| after_keyword(r, "def"))
    {
        if skip_spaces1(rest).is_some() {
            return true;
        }
    }
    ["def", "class"]
        .iter()
        .any(|kw| after_keyword(s, kw).and_then(skip_spaces1).is_some())
}

/// `^(async\s+def|def)\b`
pub fn starts_with_def(s: &str) -> bool {
    let boundary = |rest: &str| rest.chars().next().map_or(true, |c| !is_word(c));
    if let Some(rest) = after_keyword(s, "async")
        .and_then(skip_spaces1)
        .and_then(|r| after_keyword(r, "def"))
    {
        if boundary(rest) {
            return true;
        }
    }
    after_keyword(s, "def").is_some_and(boundary)
}

/// `^(async\s+def|def|class|type)\s+\w+\[`
pub fn starts_with_generic(s: &str) -> bool {
    let name_then_bracket = |rest: &str| {
        let Some(rest) = skip_spaces1(rest) else {
            return false;
        };
        let name = rest.trim_start_matches(is_word);
        name.len() < rest.len() && name.starts_with('[')
    };
    if let Some(rest) = after_keyword(s, "async")
        .and_then(skip_spaces1)
        .and_then(|r| after_keyword(r, "def"))
    {
        if name_then_bracket(rest) {
            return true;
        }
    }
    ["def", "class", "type"]
        .iter()
        .any(|kw| after_keyword(s, kw).is_some_and(name_then_bracket))
}
