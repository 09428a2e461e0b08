//! Automatic evaluation: Distinct-n, emotion accuracy, perplexity.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One generated response, as read from an evaluation file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    #[serde(default)]
    pub response_text: String,
    #[serde(default)]
    pub token_logprobs: Option<Vec<f64>>,
    #[serde(default)]
    pub predicted_emotion: Option<String>,
    #[serde(default)]
    pub gold_emotion: Option<String>,
}

/// Corpus-level unique / total n-gram ratio over lowercased whitespace
/// tokens. 0 when there are no n-grams at all.
pub fn distinct_n<S: AsRef<str>>(responses: &[S], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let mut unique: HashSet<Vec<String>> = HashSet::new();
    let mut total = 0usize;
    for r in responses {
        let tokens: Vec<String> = r
            .as_ref()
            .to_lowercase()
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        for gram in tokens.windows(n) {
            total += 1;
            if !unique.contains(gram) {
                unique.insert(gram.to_vec());
            }
        }
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(unique.len() as f64 / total as f64)
}

pub fn emotion_accuracy<S: AsRef<str>, T: AsRef<str>>(
    predictions: &[S],
    golds: &[T],
) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::Invalid(format!(
            "{} predictions but {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Invalid("no labels to compare".into()));
    }
    let hits = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p.as_ref().trim().to_lowercase() == g.as_ref().trim().to_lowercase())
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Token-weighted `exp(−Σ log p / N)` over all records.
pub fn corpus_perplexity<V: AsRef<[f64]>>(records: &[V]) -> Result<f64> {
    // Neumaier summation keeps the result independent of record grouping.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut count = 0usize;
    for r in records {
        for &lp in r.as_ref() {
            if lp.is_nan() || lp > 0.0 {
                return Err(Error::Invalid(format!("log-probability {lp} is not <= 0")));
            }
            let t = sum + lp;
            if sum.abs() >= lp.abs() {
                comp += (sum - t) + lp;
            } else {
                comp += (lp - t) + sum;
            }
            sum = t;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Invalid("no tokens to score".into()));
    }
    Ok((-(sum + comp) / count as f64).exp())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emotion_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
}

impl MetricsReport {
    /// Every metric the records have inputs for.
    pub fn from_records(records: &[GenerationRecord]) -> Result<Self> {
        let responses: Vec<&str> = records.iter().map(|r| r.response_text.as_str()).collect();
        let labelled: Vec<(&str, &str)> = records
            .iter()
            .filter_map(|r| Some((r.predicted_emotion.as_deref()?, r.gold_emotion.as_deref()?)))
            .collect();
        let logprobs: Vec<&[f64]> = records
            .iter()
            .filter_map(|r| r.token_logprobs.as_deref())
            .collect();
        let (preds, golds): (Vec<&str>, Vec<&str>) = labelled.into_iter().unzip();
        let has_tokens = logprobs.iter().any(|l| !l.is_empty());
        Ok(Self {
            records: records.len(),
            distinct_1: (!records.is_empty())
                .then(|| distinct_n(&responses, 1))
                .transpose()?,
            distinct_2: (!records.is_empty())
                .then(|| distinct_n(&responses, 2))
                .transpose()?,
            emotion_accuracy: (!preds.is_empty())
                .then(|| emotion_accuracy(&preds, &golds))
                .transpose()?,
            perplexity: has_tokens
                .then(|| corpus_perplexity(&logprobs))
                .transpose()?,
        })
    }
}
