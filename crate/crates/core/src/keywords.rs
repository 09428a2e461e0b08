//! Keyword extraction: rank context tokens by cosine similarity to the
//! embedding of the whole context.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::embeddings::{cosine, Embedding, EmbeddingProvider};
use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");

pub const DEFAULT_MAX_KEYWORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    /// English stop words (NLTK and spaCy lists, merged).
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED_STOPWORDS.as_bytes()).expect("bundled stopword list is valid")
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            words.insert(w.to_lowercase());
        }
        if words.is_empty() {
            return Err(Error::Invalid("stopword list is empty".into()));
        }
        Ok(Self { words })
    }

    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().to_lowercase())
            .collect();
        if words.is_empty() {
            return Err(Error::Invalid("stopword list is empty".into()));
        }
        Ok(Self { words })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercase, split on whitespace, trim non-alphanumeric characters from both
/// ends of every token, drop what is left empty.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Digits with optional `.`/`,` separators ("3", "1,000", "2.5"). Words such
/// as "nan" or "inf" are not numeric here.
pub fn is_numeric(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, ',' | '.'))
}

/// Up to `max_keywords` candidates, best first. The document embedding is the
/// mean over candidate occurrences, so repeated words weigh more.
pub fn extract_keywords<P: EmbeddingProvider + ?Sized>(
    text: &str,
    provider: &P,
    stopwords: &StopwordSet,
    max_keywords: usize,
) -> Vec<Keyword> {
    let mut occurrences: Vec<String> = Vec::new();
    let mut unique: BTreeSet<String> = BTreeSet::new();
    let mut rejected: HashSet<String> = HashSet::new();
    let mut vectors: Vec<(String, Embedding)> = Vec::new();

    for token in tokenize(text) {
        if rejected.contains(&token) {
            continue;
        }
        if unique.contains(&token) {
            occurrences.push(token);
            continue;
        }
        if stopwords.contains(&token) || is_numeric(&token) {
            rejected.insert(token);
            continue;
        }
        let e = provider.embed_token(&token);
        if e.is_zero {
            rejected.insert(token);
            continue;
        }
        unique.insert(token.clone());
        vectors.push((token.clone(), e));
        occurrences.push(token);
    }
    if vectors.is_empty() {
        return Vec::new();
    }

    // Sum in sorted-token order so the document vector does not depend on
    // where repeated words appear.
    occurrences.sort_unstable();
    vectors.sort_by(|a, b| a.0.cmp(&b.0));
    let lookup = |t: &str| &vectors[vectors.binary_search_by(|v| v.0.as_str().cmp(t)).unwrap()].1;
    let doc = Embedding::mean(provider.dimension(), occurrences.iter().map(|t| lookup(t)));

    let mut scored: Vec<Keyword> = vectors
        .iter()
        .map(|(token, e)| Keyword {
            token: token.clone(),
            score: cosine(e, &doc).unwrap_or(0.0),
        })
        .filter(|k| k.score > 0.0)
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.token.cmp(&b.token))
    });
    scored.truncate(max_keywords);
    scored
}
