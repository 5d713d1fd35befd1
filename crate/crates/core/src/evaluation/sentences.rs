/// Tokens ending in a period that do not end a sentence. Matched
/// case-insensitively against the whitespace-delimited token.
pub const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "approx.", "incl.", "mr.", "mrs.", "ms.", "dr.", "prof.",
    "st.", "inc.", "corp.", "ltd.", "co.", "no.", "u.s.", "u.k.", "e.u.",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_abbreviation(token: &str) -> bool {
    let token = token.trim_start_matches(['(', '"', '\'', '\u{201c}']);
    ABBREVIATIONS.iter().any(|a| a.eq_ignore_ascii_case(token))
}

/// Split on `.`, `!` or `?` (optionally followed by closing quotes or
/// brackets) when whitespace or the end of text follows. Known
/// abbreviations do not end a sentence. Fragments are trimmed and empty
/// ones dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut k = 0;
    while k < chars.len() {
        let (_, c) = chars[k];
        if !is_terminal(c) {
            k += 1;
            continue;
        }
        let mut end = k + 1;
        while end < chars.len() && (is_terminal(chars[end].1) || is_closer(chars[end].1)) {
            end += 1;
        }
        let boundary = end == chars.len() || chars[end].1.is_whitespace();
        let byte_end = chars.get(end).map_or(text.len(), |(i, _)| *i);
        if boundary {
            let token_start = text[..byte_end]
                .rfind(char::is_whitespace)
                .map_or(0, |i| i + 1);
            if !(c == '.' && is_abbreviation(&text[token_start.max(start)..byte_end])) {
                push(&mut out, &text[start..byte_end]);
                start = byte_end;
            }
        }
        k = end;
    }
    push(&mut out, &text[start..]);
    out
}

fn push(out: &mut Vec<String>, fragment: &str) {
    let s = fragment.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}
