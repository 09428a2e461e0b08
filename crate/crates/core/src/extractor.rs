//! Concept extraction: keywords → candidate triples → removal rules →
//! scoring → top-k selection → rendered concept string.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::embeddings::{cosine, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::keywords::{extract_keywords, Keyword, StopwordSet, DEFAULT_MAX_KEYWORDS};
use crate::knowledge::{Assertion, KnowledgeStore, Relation};
use crate::lexicon::{emotion_intensity, VadLexicon};
use crate::stem::stems_equal;

/// Relations never used as concepts. `dbpedia` covers the whole family.
pub const DEFAULT_EXCLUDED: &[&str] = &[
    "Antonym",
    "ExternalURL",
    "NotDesires",
    "NotHasProperty",
    "NotCapableOf",
    "dbpedia",
    "DistinctFrom",
    "EtymologicallyDerivedFrom",
    "EtymologicallyRelatedTo",
    "SymbolOf",
    "FormOf",
    "AtLocation",
    "DerivedFrom",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptSeparator {
    #[default]
    Semicolon,
    Comma,
}

impl ConceptSeparator {
    pub fn as_str(self) -> &'static str {
        match self {
            ConceptSeparator::Semicolon => "; ",
            ConceptSeparator::Comma => ", ",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorConfig {
    pub alpha: f64,
    pub tuples_per_keyword: usize,
    pub tuples_per_context: usize,
    pub max_keywords: usize,
    pub excluded_relations: BTreeSet<Relation>,
    pub separator: ConceptSeparator,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            tuples_per_keyword: 3,
            tuples_per_context: 10,
            max_keywords: DEFAULT_MAX_KEYWORDS,
            excluded_relations: default_excluded_relations(),
            separator: ConceptSeparator::Semicolon,
        }
    }
}

pub fn default_excluded_relations() -> BTreeSet<Relation> {
    DEFAULT_EXCLUDED
        .iter()
        .flat_map(|name| Relation::matching(name))
        .collect()
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Invalid(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.tuples_per_keyword == 0 || self.tuples_per_context == 0 || self.max_keywords == 0 {
            return Err(Error::Invalid("selection limits must be positive".into()));
        }
        Ok(())
    }
}

/// A looked-up assertion tagged with the keyword that found it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTuple {
    pub keyword: String,
    pub relation: Relation,
    pub concept: String,
    pub scaled_confidence: f64,
}

impl CandidateTuple {
    pub fn from_assertion(keyword: &str, a: &Assertion) -> Self {
        Self {
            keyword: keyword.to_owned(),
            relation: a.relation,
            concept: a.end.clone(),
            scaled_confidence: a.scaled_confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Removal {
    Stopword,
    LowConfidence,
    SameStem,
    ExcludedRelation,
}

/// First removal rule the tuple trips, if any.
pub fn removal_reason(
    t: &CandidateTuple,
    config: &ExtractorConfig,
    stopwords: &StopwordSet,
) -> Option<Removal> {
    if stopwords.contains(&t.keyword) || stopwords.contains(&t.concept) {
        Some(Removal::Stopword)
    } else if t.scaled_confidence < config.alpha {
        Some(Removal::LowConfidence)
    } else if stems_equal(&t.keyword.to_lowercase(), &t.concept.to_lowercase()) {
        Some(Removal::SameStem)
    } else if config.excluded_relations.contains(&t.relation) {
        Some(Removal::ExcludedRelation)
    } else {
        None
    }
}

pub fn filter_tuples(
    candidates: Vec<CandidateTuple>,
    config: &ExtractorConfig,
    stopwords: &StopwordSet,
) -> Vec<CandidateTuple> {
    candidates
        .into_iter()
        .filter(|t| removal_reason(t, config, stopwords).is_none())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTuple {
    pub keyword: String,
    pub relation: Relation,
    pub concept: String,
    pub scaled_confidence: f64,
    pub emotion_intensity: f64,
    pub similarity: f64,
    pub final_score: f64,
}

impl ScoredTuple {
    pub fn render(&self) -> String {
        format!(
            "{} <{}> {}",
            self.keyword,
            self.relation.display(),
            self.concept
        )
    }
}

pub fn score_tuple<P: EmbeddingProvider + ?Sized>(
    tuple: CandidateTuple,
    lexicon: &VadLexicon,
    vectors: &P,
) -> ScoredTuple {
    let eta = emotion_intensity(lexicon, &tuple.concept);
    let similarity = cosine(
        &vectors.embed_token(&tuple.keyword),
        &vectors.embed_phrase(&tuple.concept),
    )
    .unwrap_or(0.0);
    let final_score = eta + similarity + tuple.scaled_confidence;
    ScoredTuple {
        keyword: tuple.keyword,
        relation: tuple.relation,
        concept: tuple.concept,
        scaled_confidence: tuple.scaled_confidence,
        emotion_intensity: eta,
        similarity,
        final_score,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptSet {
    pub tuples: Vec<ScoredTuple>,
    pub rendered: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub keywords: Vec<Keyword>,
    pub concepts: ConceptSet,
}

pub fn render_concepts(tuples: &[ScoredTuple], separator: ConceptSeparator) -> String {
    tuples
        .iter()
        .map(ScoredTuple::render)
        .collect::<Vec<_>>()
        .join(separator.as_str())
}

fn by_score(a: &ScoredTuple, b: &ScoredTuple) -> Ordering {
    b.final_score
        .total_cmp(&a.final_score)
        .then_with(|| a.relation.name().cmp(b.relation.name()))
        .then_with(|| a.concept.cmp(&b.concept))
}

/// Runs the whole pipeline on one dialogue context.
pub fn extract_concepts<P: EmbeddingProvider + ?Sized>(
    context: &str,
    store: &KnowledgeStore,
    lexicon: &VadLexicon,
    vectors: &P,
    stopwords: &StopwordSet,
    config: &ExtractorConfig,
) -> Extraction {
    let keywords = extract_keywords(context, vectors, stopwords, config.max_keywords);

    // (keyword rank, index within keyword, tuple)
    let mut pool: Vec<(usize, usize, ScoredTuple)> = Vec::new();
    for (rank, kw) in keywords.iter().enumerate() {
        let candidates: Vec<CandidateTuple> = store
            .query(&kw.token)
            .map(|a| CandidateTuple::from_assertion(&kw.token, &a))
            .collect();
        let mut scored: Vec<ScoredTuple> = filter_tuples(candidates, config, stopwords)
            .into_iter()
            .map(|t| score_tuple(t, lexicon, vectors))
            .collect();
        scored.sort_by(by_score);
        scored.truncate(config.tuples_per_keyword);
        pool.extend(scored.into_iter().enumerate().map(|(i, t)| (rank, i, t)));
    }

    pool.sort_by(|a, b| by_score(&a.2, &b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    pool.truncate(config.tuples_per_context);
    let tuples: Vec<ScoredTuple> = pool.into_iter().map(|(_, _, t)| t).collect();
    let rendered = render_concepts(&tuples, config.separator);
    Extraction {
        keywords,
        concepts: ConceptSet { tuples, rendered },
    }
}
