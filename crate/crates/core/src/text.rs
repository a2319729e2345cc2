//! Tokenization shared by the lexical index, the embedder and span location.

/// Lowercased alphanumeric runs. Any non-alphanumeric character separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Token sequence joined by single spaces and padded on both ends, so that a
/// phrase can be matched on token boundaries with a plain substring test.
pub fn normalized_padded(text: &str) -> String {
    let tokens = tokenize(text);
    let mut out = String::with_capacity(text.len() + 2);
    out.push(' ');
    for t in &tokens {
        out.push_str(t);
        out.push(' ');
    }
    out
}

/// Case-folded phrase containment over tokenized text.
pub fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    let needle = normalized_padded(phrase);
    if needle.trim().is_empty() {
        return false;
    }
    normalized_padded(haystack).contains(&needle)
}

/// Tokens of `new` not accounted for in `old` (multiset difference), in `new` order.
pub fn added_tokens(old: &str, new: &str) -> Vec<String> {
    multiset_difference(&tokenize(new), &tokenize(old))
}

pub fn removed_tokens(old: &str, new: &str) -> Vec<String> {
    multiset_difference(&tokenize(old), &tokenize(new))
}

fn multiset_difference(a: &[String], b: &[String]) -> Vec<String> {
    let mut remaining: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for t in b {
        *remaining.entry(t.as_str()).or_default() += 1;
    }
    let mut out = Vec::new();
    for t in a {
        match remaining.get_mut(t.as_str()) {
            Some(n) if *n > 0 => *n -= 1,
            _ => out.push(t.clone()),
        }
    }
    out
}

/// Uppercase the first character.
pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
