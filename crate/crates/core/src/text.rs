//! Surface normalisation shared by the trainer and the training-text writer:
//! lowercase, drop punctuation except underscores and hyphens.

/// Normalises one token. May return an empty string.
pub fn normalize_token(token: &str) -> String {
    token
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '_' || *c == '-')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Splits raw text into normalised tokens.
pub fn preprocess(raw: &str) -> Vec<String> {
    raw.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn titlecase(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first
            .to_uppercase()
            .chain(chars.flat_map(char::to_lowercase))
            .collect(),
        None => String::new(),
    }
}

fn is_all_caps(word: &str) -> bool {
    let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some()
        && word.chars().filter(|c| c.is_alphabetic()).count() > 1
        && letters.all(char::is_uppercase)
}

/// Gives `replacement` the case shape of `original`: all-caps stays all-caps,
/// otherwise only the leading character's case is copied.
pub fn mirror_case(original: &str, replacement: &str) -> String {
    if is_all_caps(original) {
        return replacement.to_uppercase();
    }
    let leading_upper = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = replacement.chars();
    match chars.next() {
        Some(first) if leading_upper => first.to_uppercase().chain(chars).collect(),
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preprocess_examples() {
        assert_eq!(preprocess("Hello, World!"), vec!["hello", "world"]);
        assert_eq!(preprocess("self-aware"), vec!["self-aware"]);
        assert_eq!(preprocess("A_B"), vec!["a_b"]);
        assert_eq!(preprocess("Mary's e-mail foo_bar ..."), vec!["marys", "e-mail", "foo_bar"]);
    }

    #[test]
    fn case_mirroring() {
        assert_eq!(mirror_case("Woman", "man"), "Man");
        assert_eq!(mirror_case("woman", "man"), "man");
        assert_eq!(mirror_case("WOMAN", "man"), "MAN");
        assert_eq!(mirror_case("john", "Mary"), "mary");
        assert_eq!(mirror_case("A", "b"), "B");
        assert_eq!(titlecase("mARY"), "Mary");
    }
}
