/// Formatting-quality gate for snippets: nonempty, no leading punctuation, and
/// the first alphabetic character is uppercase.
pub fn filter_snippet(text: &str) -> bool {
    let Some(first) = text.chars().find(|c| !c.is_whitespace()) else {
        return false;
    };
    if is_punctuation(first) {
        return false;
    }
    match text.chars().find(|c| c.is_alphabetic()) {
        Some(c) => c.is_uppercase(),
        None => false,
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205e}' | '\u{00a1}' | '\u{00a7}' | '\u{00ab}' | '\u{00b6}' | '\u{00b7}' | '\u{00bb}' | '\u{00bf}'
        )
}
