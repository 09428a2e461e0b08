//! Brute-force reference for the concept pipeline, plus random toy resources.
//!
//! Everything here is written against the raw assertion list and plain
//! vectors, without the store index, the embedding trait or the library's
//! selection code, so agreement with `extract_concepts` is meaningful.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use ckece::{Assertion, Relation};
use rand::seq::SliceRandom;
use rand::Rng;
use rust_stemmers::{Algorithm, Stemmer};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefTuple {
    pub keyword: String,
    pub relation: String,
    pub concept: String,
    pub scaled_confidence: f64,
    pub emotion_intensity: f64,
    pub similarity: f64,
    pub final_score: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefOutput {
    pub keywords: Vec<(String, f64)>,
    pub tuples: Vec<RefTuple>,
    pub rendered: String,
}

pub struct Resources {
    pub assertions: Vec<Assertion>,
    pub vectors: HashMap<String, Vec<f64>>,
    pub dimension: usize,
    pub vad: HashMap<String, (f64, f64)>,
    pub stopwords: HashSet<String>,
    pub excluded: HashSet<&'static str>,
    pub alpha: f64,
}

pub const EXCLUDED: &[&str] = &[
    "Antonym",
    "ExternalURL",
    "NotDesires",
    "NotHasProperty",
    "NotCapableOf",
    "DistinctFrom",
    "EtymologicallyDerivedFrom",
    "EtymologicallyRelatedTo",
    "SymbolOf",
    "FormOf",
    "AtLocation",
    "DerivedFrom",
];

pub fn is_excluded(set: &HashSet<&str>, relation: &str) -> bool {
    set.contains(relation) || (set.contains("dbpedia") && relation.starts_with("dbpedia/"))
}

pub fn default_excluded() -> HashSet<&'static str> {
    let mut s: HashSet<&str> = EXCLUDED.iter().copied().collect();
    s.insert("dbpedia");
    s
}

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let chars: Vec<char> = raw.chars().collect();
        let mut a = 0;
        let mut b = chars.len();
        while a < b && !chars[a].is_alphanumeric() {
            a += 1;
        }
        while b > a && !chars[b - 1].is_alphanumeric() {
            b -= 1;
        }
        let w: String = chars[a..b].iter().collect::<String>().to_lowercase();
        if !w.is_empty() {
            out.push(w);
        }
    }
    out
}

fn numeric(w: &str) -> bool {
    w.chars().any(|c| c.is_ascii_digit())
        && w.chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

fn nonzero(v: &[f64]) -> bool {
    v.iter().any(|&x| x != 0.0)
}

fn mean_of(vs: &[&Vec<f64>], dim: usize) -> Vec<f64> {
    let mut s = vec![0.0; dim];
    for v in vs {
        for i in 0..dim {
            s[i] += v[i];
        }
    }
    if !vs.is_empty() {
        for x in &mut s {
            *x /= vs.len() as f64;
        }
    }
    s
}

impl Resources {
    fn vec_of(&self, w: &str) -> Option<&Vec<f64>> {
        self.vectors.get(w).filter(|v| nonzero(v))
    }

    pub fn keywords(&self, context: &str, max: usize) -> Vec<(String, f64)> {
        let cands: Vec<String> = words(context)
            .into_iter()
            .filter(|w| !self.stopwords.contains(w) && !numeric(w) && self.vec_of(w).is_some())
            .collect();
        let mut sorted = cands.clone();
        sorted.sort();
        let vs: Vec<&Vec<f64>> = sorted.iter().map(|w| self.vec_of(w).unwrap()).collect();
        let doc = mean_of(&vs, self.dimension);
        let mut uniq = sorted.clone();
        uniq.dedup();
        let mut out: Vec<(String, f64)> = uniq
            .into_iter()
            .map(|w| {
                let s = cos(self.vec_of(&w).unwrap(), &doc);
                (w, s)
            })
            .filter(|(_, s)| *s > 0.0)
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out.truncate(max);
        out
    }

    fn phrase(&self, p: &str) -> Vec<f64> {
        let mut toks: Vec<&str> = p.split_whitespace().collect();
        toks.sort();
        let known: Vec<&Vec<f64>> = toks.iter().filter_map(|t| self.vec_of(t)).collect();
        mean_of(&known, self.dimension)
    }

    fn intensity(&self, concept: &str) -> f64 {
        match self.vad.get(concept) {
            None => 0.5,
            Some(&(v, a)) => {
                let n = ((v - 0.5) * (v - 0.5) + (a / 2.0) * (a / 2.0)).sqrt();
                (n / (2f64.sqrt() / 2.0)).clamp(0.0, 1.0)
            }
        }
    }

    fn same_stem(&self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        let st = Stemmer::create(Algorithm::English);
        let ta: Vec<&str> = a.split(' ').collect();
        let tb: Vec<&str> = b.split(' ').collect();
        ta.len() == tb.len() && ta.iter().zip(&tb).all(|(x, y)| st.stem(x) == st.stem(y))
    }

    /// Every (keyword, assertion) pair, filtered and scored, then a greedy
    /// walk over one global ordering that enforces both caps.
    pub fn reference(
        &self,
        context: &str,
        max_keywords: usize,
        per_keyword: usize,
        per_context: usize,
    ) -> RefOutput {
        let keywords = self.keywords(context, max_keywords);
        let mut rows: Vec<(usize, usize, RefTuple)> = Vec::new();
        for (rank, (kw, _)) in keywords.iter().enumerate() {
            for (idx, a) in self.assertions.iter().enumerate() {
                if &a.start != kw {
                    continue;
                }
                let s = ((a.raw_confidence.clamp(1.0, 10.0)) - 1.0) / 9.0;
                let rel = a.relation.name();
                if self.stopwords.contains(kw) || self.stopwords.contains(&a.end) {
                    continue;
                }
                if s < self.alpha {
                    continue;
                }
                if self.same_stem(kw, &a.end) {
                    continue;
                }
                if is_excluded(&self.excluded, rel) {
                    continue;
                }
                let eta = self.intensity(&a.end);
                let kv = self
                    .vec_of(kw)
                    .cloned()
                    .unwrap_or_else(|| vec![0.0; self.dimension]);
                let sim = cos(&kv, &self.phrase(&a.end));
                rows.push((
                    rank,
                    idx,
                    RefTuple {
                        keyword: kw.clone(),
                        relation: rel.to_string(),
                        concept: a.end.clone(),
                        scaled_confidence: s,
                        emotion_intensity: eta,
                        similarity: sim,
                        final_score: eta + sim + s,
                    },
                ));
            }
        }
        rows.sort_by(|x, y| {
            y.2.final_score
                .partial_cmp(&x.2.final_score)
                .unwrap()
                .then(x.2.relation.cmp(&y.2.relation))
                .then(x.2.concept.cmp(&y.2.concept))
                .then(x.0.cmp(&y.0))
                .then(x.1.cmp(&y.1))
        });
        let mut taken: HashMap<String, usize> = HashMap::new();
        let mut tuples = Vec::new();
        for (_, _, t) in rows {
            if tuples.len() == per_context {
                break;
            }
            let c = taken.entry(t.keyword.clone()).or_default();
            if *c < per_keyword {
                *c += 1;
                tuples.push(t);
            }
        }
        let rendered = tuples
            .iter()
            .map(|t| format!("{} <{}> {}", t.keyword, display(&t.relation), t.concept))
            .collect::<Vec<_>>()
            .join("; ");
        RefOutput {
            keywords,
            tuples,
            rendered,
        }
    }
}

/// Independent camel-case splitter.
pub fn display(rel: &str) -> String {
    let mut out = String::new();
    let chars: Vec<char> = rel.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c == '/' {
            out.push(' ');
        } else if c.is_ascii_uppercase() && i > 0 && chars[i - 1].is_ascii_lowercase() {
            out.push(' ');
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c.to_ascii_lowercase());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random toy resources

pub const VOCAB: &[&str] = &[
    "fear", "panic", "cough", "blood", "cancer", "disease", "sneeze", "scared", "lonely", "friend",
    "club", "moms", "fears", "coughing", "cell", "sad", "happy", "joy", "pain", "doctor",
];
const FILLER: &[&str] = &[
    "i", "the", "and", "so", "am", "it", "3", "days", "very", "zzz",
];

pub fn random_resources<R: Rng>(rng: &mut R, n_assertions: usize) -> Resources {
    let dim = 4;
    let mut vectors = HashMap::new();
    for w in VOCAB.iter().chain(["days"].iter()) {
        if rng.gen_bool(0.9) {
            // quantized components keep ties possible
            let v: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(-4i32..=4) as f64 / 4.0)
                .collect();
            vectors.insert(w.to_string(), v);
        }
    }
    let mut vad = HashMap::new();
    for w in VOCAB {
        if rng.gen_bool(0.5) {
            vad.insert(
                w.to_string(),
                (
                    rng.gen_range(0..=1000) as f64 / 1000.0,
                    rng.gen_range(0..=1000) as f64 / 1000.0,
                ),
            );
        }
    }
    let concepts: Vec<String> = VOCAB
        .iter()
        .map(|s| s.to_string())
        .chain(
            ["blood cell", "the", "heart attack"]
                .iter()
                .map(|s| s.to_string()),
        )
        .collect();
    let mut assertions = Vec::new();
    for _ in 0..n_assertions {
        let start = VOCAB.choose(rng).unwrap();
        let end = concepts.choose(rng).unwrap();
        let rel = *Relation::ALL.choose(rng).unwrap();
        let raw = [0.5, 1.0, 1.5, 1.9, 2.0, 2.5, 3.464, 4.0, 6.0, 9.0, 11.0][rng.gen_range(0..11)];
        assertions.push(Assertion::new(start, rel, end, raw));
    }
    let stopwords: HashSet<String> = ckece_stopwords();
    Resources {
        assertions,
        vectors,
        dimension: dim,
        vad,
        stopwords,
        excluded: default_excluded(),
        alpha: 0.1,
    }
}

pub fn random_context<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(0..14);
    let mut w = Vec::new();
    for _ in 0..n {
        let t = if rng.gen_bool(0.7) {
            VOCAB.choose(rng).unwrap()
        } else {
            FILLER.choose(rng).unwrap()
        };
        let punct = ["", "", ".", "!", ","][rng.gen_range(0..5)];
        let t = if rng.gen_bool(0.2) {
            t.to_uppercase()
        } else {
            t.to_string()
        };
        w.push(format!("{t}{punct}"));
    }
    w.join(" ")
}

fn ckece_stopwords() -> HashSet<String> {
    include_str!("../../data/stopwords.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

pub fn vector_text(res: &Resources) -> String {
    let mut keys: Vec<&String> = res.vectors.keys().collect();
    keys.sort();
    keys.iter()
        .map(|k| {
            let v: Vec<String> = res.vectors[*k].iter().map(|x| x.to_string()).collect();
            format!("{k} {}", v.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn vad_text(res: &Resources) -> String {
    let mut keys: Vec<&String> = res.vad.keys().collect();
    keys.sort();
    let mut s = String::from("word\tvalence\tarousal\tdominance\n");
    for k in keys {
        let (v, a) = res.vad[k];
        s.push_str(&format!("{k}\t{v}\t{a}\t0.5\n"));
    }
    s
}
