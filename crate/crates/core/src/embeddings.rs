//! Static word vectors (GloVe-style text tables) and cosine similarity.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// A dense vector. `is_zero` marks the fallback for unknown tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub values: Vec<f64>,
    pub is_zero: bool,
}

impl Embedding {
    pub fn zero(dimension: usize) -> Self {
        Self {
            values: vec![0.0; dimension],
            is_zero: true,
        }
    }

    pub fn new(values: Vec<f64>) -> Self {
        let is_zero = values.iter().all(|&v| v == 0.0);
        Self { values, is_zero }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Arithmetic mean of the non-zero embeddings; zero if there are none.
    pub fn mean<'a>(dimension: usize, items: impl IntoIterator<Item = &'a Embedding>) -> Self {
        let mut sum = vec![0.0; dimension];
        let mut n = 0usize;
        for e in items.into_iter().filter(|e| !e.is_zero) {
            for (acc, v) in sum.iter_mut().zip(&e.values) {
                *acc += v;
            }
            n += 1;
        }
        if n == 0 {
            return Self::zero(dimension);
        }
        for v in &mut sum {
            *v /= n as f64;
        }
        Self::new(sum)
    }
}

/// Anything that can embed tokens and phrases into one fixed-size space.
///
/// Keyword extraction and tuple scoring only talk to this trait, so a
/// contextual (transformer) embedder can stand in for the word-vector table.
pub trait EmbeddingProvider {
    fn dimension(&self) -> usize;

    fn embed_token(&self, token: &str) -> Embedding;

    /// Mean of the known token embeddings of a space-separated phrase.
    /// Tokens are summed in sorted order so the result is exactly
    /// independent of word order.
    fn embed_phrase(&self, phrase: &str) -> Embedding {
        let mut tokens: Vec<&str> = phrase.split_whitespace().collect();
        tokens.sort_unstable();
        let parts: Vec<Embedding> = tokens.iter().map(|t| self.embed_token(t)).collect();
        Embedding::mean(self.dimension(), &parts)
    }
}

/// Token → vector table. Vectors are kept as `f32` (the precision of the
/// published tables) and widened on lookup.
#[derive(Debug, Clone)]
pub struct VectorStore {
    dimension: usize,
    index: HashMap<String, u32>,
    data: Vec<f32>,
}

impl VectorStore {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Invalid("vector dimension must be positive".into()));
        }
        Ok(Self {
            dimension,
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn insert(&mut self, token: &str, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                left: vector.len(),
                right: self.dimension,
            });
        }
        if self.index.contains_key(token) {
            return Err(Error::Duplicate {
                line: self.index.len() + 1,
                key: token.to_owned(),
            });
        }
        self.index.insert(token.to_owned(), self.index.len() as u32);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    /// Parses `token v1 … vD` lines. A leading word2vec-style
    /// `<count> <dimension>` header line is accepted and skipped.
    pub fn from_reader<R: BufRead>(reader: R, expected_dimension: usize) -> Result<Self> {
        let mut store = Self::new(expected_dimension)?;
        let mut row: Vec<f32> = Vec::with_capacity(expected_dimension);
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ').filter(|p| !p.is_empty());
            let token = parts.next().unwrap_or_default();
            row.clear();
            for p in parts {
                let v = p
                    .parse::<f32>()
                    .map_err(|_| Error::parse(line_no, format!("`{p}` is not a number")))?;
                row.push(v);
            }
            if line_no == 1 && expected_dimension != 1 && is_header(token, &row) {
                if row[0] as usize != expected_dimension {
                    return Err(Error::parse(
                        1,
                        format!(
                            "header declares dimension {}, expected {expected_dimension}",
                            row[0]
                        ),
                    ));
                }
                continue;
            }
            if row.len() != expected_dimension {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "expected {expected_dimension} components, found {}",
                        row.len()
                    ),
                ));
            }
            if store.index.contains_key(token) {
                return Err(Error::Duplicate {
                    line: line_no,
                    key: token.to_owned(),
                });
            }
            store.insert(token, &row)?;
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        let i = *self.index.get(token)? as usize;
        Some(&self.data[i * self.dimension..(i + 1) * self.dimension])
    }
}

fn is_header(token: &str, row: &[f32]) -> bool {
    row.len() == 1 && token.parse::<u64>().is_ok() && row[0].fract() == 0.0 && row[0] > 0.0
}

impl EmbeddingProvider for VectorStore {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_token(&self, token: &str) -> Embedding {
        match self.get(token) {
            Some(v) => Embedding::new(v.iter().map(|&x| f64::from(x)).collect()),
            None => Embedding::zero(self.dimension),
        }
    }
}

pub fn load_vectors<R: BufRead>(reader: R, expected_dimension: usize) -> Result<VectorStore> {
    VectorStore::from_reader(reader, expected_dimension)
}

/// Cosine similarity; 0.0 when either side has zero norm.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}
