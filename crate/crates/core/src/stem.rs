//! Snowball English stemming for the same-stem removal rule.

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

pub fn stem(token: &str) -> String {
    stemmer().stem(token).into_owned()
}

/// True when `a` and `b` are equal or reduce to the same stem. Phrases are
/// compared token by token.
pub fn stems_equal(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let ta: Vec<&str> = a.split_whitespace().collect();
    let tb: Vec<&str> = b.split_whitespace().collect();
    ta.len() == tb.len()
        && ta
            .iter()
            .zip(&tb)
            .all(|(x, y)| x == y || stem(x) == stem(y))
}
