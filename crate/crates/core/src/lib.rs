//! Commonsense knowledge and emotional concept extraction for empathetic
//! dialogue generation.
//!
//! The pipeline runs keyword extraction over a dialogue context, looks the
//! keywords up in a ConceptNet-derived [`KnowledgeStore`], filters and scores
//! the candidate triples with confidence, emotion intensity (NRC VAD) and
//! word-vector similarity, and renders the survivors as a plain-text concept
//! string. The [`corpus`] module turns EmpatheticDialogues files into
//! encoder/decoder training text, and [`metrics`] implements the automatic
//! evaluation measures.

pub mod corpus;
pub mod embeddings;
mod error;
pub mod extractor;
pub mod keywords;
pub mod knowledge;
pub mod lexicon;
pub mod metrics;
pub mod stem;

pub use embeddings::{cosine, Embedding, EmbeddingProvider, VectorStore};
pub use error::{Error, Result};
pub use extractor::{
    extract_concepts, render_concepts, ConceptSeparator, ConceptSet, Extraction, ExtractorConfig,
    ScoredTuple,
};
pub use keywords::{extract_keywords, tokenize, Keyword, StopwordSet};
pub use knowledge::{Assertion, IngestOptions, IngestReport, KnowledgeStore, Relation};
pub use lexicon::{emotion_intensity, min_max_scale, NormalizationBounds, VadEntry, VadLexicon};
