use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// Case-folded tokens of a text, stopwords removed. Never holds empty tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Keeps the non-empty tokens as given.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(tokens.into_iter().map(Into::into).filter(|t: &String| !t.is_empty()).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Splits on every character that is neither a letter nor a digit, lowercases,
/// and drops tokens found in `stopwords` (which are expected lowercase).
pub fn tokenize(text: &str, stopwords: &BTreeSet<String>) -> TokenSeq {
    TokenSeq(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| !stopwords.contains(t))
            .collect(),
    )
}

/// Contiguous `n`-token windows joined by a single space, in text order.
/// Yields nothing for `n == 0` or sequences shorter than `n`.
pub fn ngrams(seq: &TokenSeq, n: usize) -> Vec<String> {
    if n == 0 {
        return Vec::new();
    }
    seq.0.windows(n).map(|w| w.join(" ")).collect()
}
