//! ConceptNet assertion store.
//!
//! Assertions are ingested from the tab-separated ConceptNet dump, concept
//! strings are interned, and a start-concept index is built once ingestion
//! finishes. The store can be persisted to a small versioned binary file.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lexicon::{min_max_scale, CONFIDENCE_BOUNDS};

macro_rules! relations {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// A ConceptNet relation. The `dbpedia/*` relations form one family.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Relation {
            $($variant),+
        }

        impl Relation {
            pub const ALL: &'static [Relation] = &[$(Relation::$variant),+];

            /// Identifier as it appears after `/r/` in the dump.
            pub fn name(self) -> &'static str {
                match self {
                    $(Relation::$variant => $name),+
                }
            }
        }
    };
}

relations! {
    RelatedTo => "RelatedTo",
    FormOf => "FormOf",
    IsA => "IsA",
    PartOf => "PartOf",
    HasA => "HasA",
    UsedFor => "UsedFor",
    CapableOf => "CapableOf",
    AtLocation => "AtLocation",
    Causes => "Causes",
    HasSubevent => "HasSubevent",
    HasFirstSubevent => "HasFirstSubevent",
    HasLastSubevent => "HasLastSubevent",
    HasPrerequisite => "HasPrerequisite",
    HasProperty => "HasProperty",
    MotivatedByGoal => "MotivatedByGoal",
    ObstructedBy => "ObstructedBy",
    Desires => "Desires",
    CreatedBy => "CreatedBy",
    Synonym => "Synonym",
    Antonym => "Antonym",
    DistinctFrom => "DistinctFrom",
    DerivedFrom => "DerivedFrom",
    SymbolOf => "SymbolOf",
    DefinedAs => "DefinedAs",
    MannerOf => "MannerOf",
    LocatedNear => "LocatedNear",
    HasContext => "HasContext",
    SimilarTo => "SimilarTo",
    EtymologicallyRelatedTo => "EtymologicallyRelatedTo",
    EtymologicallyDerivedFrom => "EtymologicallyDerivedFrom",
    CausesDesire => "CausesDesire",
    MadeOf => "MadeOf",
    ReceivesAction => "ReceivesAction",
    ExternalUrl => "ExternalURL",
    InstanceOf => "InstanceOf",
    Entails => "Entails",
    NotDesires => "NotDesires",
    NotUsedFor => "NotUsedFor",
    NotCapableOf => "NotCapableOf",
    NotHasProperty => "NotHasProperty",
    DbpediaCapital => "dbpedia/capital",
    DbpediaField => "dbpedia/field",
    DbpediaGenre => "dbpedia/genre",
    DbpediaGenus => "dbpedia/genus",
    DbpediaInfluencedBy => "dbpedia/influencedBy",
    DbpediaKnownFor => "dbpedia/knownFor",
    DbpediaLanguage => "dbpedia/language",
    DbpediaLeader => "dbpedia/leader",
    DbpediaOccupation => "dbpedia/occupation",
    DbpediaProduct => "dbpedia/product",
}

impl Relation {
    pub fn from_name(name: &str) -> Option<Relation> {
        Relation::ALL.iter().copied().find(|r| r.name() == name)
    }

    /// Relations matched by an exclusion-list entry. A bare family name such
    /// as `dbpedia` expands to every member of the family.
    pub fn matching(entry: &str) -> Vec<Relation> {
        if let Some(r) = Relation::from_name(entry) {
            return vec![r];
        }
        Relation::ALL
            .iter()
            .copied()
            .filter(|r| r.family() == Some(entry))
            .collect()
    }

    pub fn family(self) -> Option<&'static str> {
        self.name().split_once('/').map(|(family, _)| family)
    }

    /// Lowercase display form: `IsA` → `is a`, `dbpedia/knownFor` →
    /// `dbpedia known for`.
    pub fn display(self) -> String {
        let mut out = String::with_capacity(self.name().len() + 4);
        let mut prev: Option<char> = None;
        for c in self.name().chars() {
            if c == '/' {
                out.push(' ');
                prev = Some(' ');
                continue;
            }
            if c.is_uppercase() {
                if matches!(prev, Some(p) if p.is_lowercase()) {
                    out.push(' ');
                }
                out.extend(c.to_lowercase());
            } else {
                out.push(c);
            }
            prev = Some(c);
        }
        out
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(code: u8) -> Option<Relation> {
        Relation::ALL.get(code as usize).copied()
    }
}

impl serde::Serialize for Relation {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Relation::from_name(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown relation `{name}`")))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn relation_display(relation: Relation) -> String {
    relation.display()
}

/// One (start, relation, end) triple with its ConceptNet weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub start: String,
    pub relation: Relation,
    pub end: String,
    pub raw_confidence: f64,
    pub scaled_confidence: f64,
}

impl Assertion {
    pub fn new(start: &str, relation: Relation, end: &str, raw_confidence: f64) -> Self {
        Self {
            start: start.to_owned(),
            relation,
            end: end.to_owned(),
            raw_confidence,
            scaled_confidence: min_max_scale(raw_confidence, CONFIDENCE_BOUNDS),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Record {
    start: u32,
    end: u32,
    relation: Relation,
    raw: f64,
    scaled: f64,
}

/// Immutable, start-concept indexed assertion store.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeStore {
    concepts: Vec<Box<str>>,
    concept_ids: HashMap<Box<str>, u32>,
    records: Vec<Record>,
    // CSR layout: records starting at concept `c` are
    // `by_start[offsets[c]..offsets[c + 1]]`, in ingestion order.
    offsets: Vec<u32>,
    by_start: Vec<u32>,
}

impl KnowledgeStore {
    pub fn builder() -> StoreBuilder {
        StoreBuilder::default()
    }

    pub fn from_assertions<'a>(
        assertions: impl IntoIterator<Item = &'a Assertion>,
    ) -> Result<Self> {
        let mut builder = StoreBuilder::default();
        for a in assertions {
            builder.push(&a.start, a.relation, &a.end, a.raw_confidence)?;
        }
        Ok(builder.finish())
    }

    pub fn assertion_count(&self) -> usize {
        self.records.len()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    /// All assertions whose start concept is exactly `keyword`, in ingestion
    /// order.
    pub fn query(&self, keyword: &str) -> impl Iterator<Item = Assertion> + '_ {
        let slice: &[u32] = match self.concept_ids.get(keyword) {
            Some(&id) => {
                let lo = self.offsets[id as usize] as usize;
                let hi = self.offsets[id as usize + 1] as usize;
                &self.by_start[lo..hi]
            }
            None => &[],
        };
        slice
            .iter()
            .map(move |&i| self.materialize(&self.records[i as usize]))
    }

    pub fn query_by_keyword(&self, keyword: &str) -> Vec<Assertion> {
        self.query(keyword).collect()
    }

    /// Every assertion in ingestion order.
    pub fn iter(&self) -> impl Iterator<Item = Assertion> + '_ {
        self.records.iter().map(|r| self.materialize(r))
    }

    fn materialize(&self, r: &Record) -> Assertion {
        Assertion {
            start: self.concepts[r.start as usize].to_string(),
            relation: r.relation,
            end: self.concepts[r.end as usize].to_string(),
            raw_confidence: r.raw,
            scaled_confidence: r.scaled,
        }
    }
}

/// Append-only builder used during ingestion.
#[derive(Debug, Default)]
pub struct StoreBuilder {
    concepts: Vec<Box<str>>,
    concept_ids: HashMap<Box<str>, u32>,
    records: Vec<Record>,
}

impl StoreBuilder {
    fn intern(&mut self, concept: &str) -> Result<u32> {
        if let Some(&id) = self.concept_ids.get(concept) {
            return Ok(id);
        }
        let id = u32::try_from(self.concepts.len())
            .map_err(|_| Error::Invalid("too many concepts".into()))?;
        let boxed: Box<str> = concept.into();
        self.concepts.push(boxed.clone());
        self.concept_ids.insert(boxed, id);
        Ok(id)
    }

    pub fn push(&mut self, start: &str, relation: Relation, end: &str, raw: f64) -> Result<()> {
        if start.is_empty() || end.is_empty() {
            return Err(Error::Invalid("empty concept".into()));
        }
        if !(raw.is_finite() && raw > 0.0) {
            return Err(Error::Invalid(format!("confidence {raw} must be positive")));
        }
        if self.records.len() >= u32::MAX as usize {
            return Err(Error::Invalid("too many assertions".into()));
        }
        let start = self.intern(start)?;
        let end = self.intern(end)?;
        self.records.push(Record {
            start,
            end,
            relation,
            raw,
            scaled: min_max_scale(raw, CONFIDENCE_BOUNDS),
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn finish(self) -> KnowledgeStore {
        let n = self.concepts.len();
        let mut offsets = vec![0u32; n + 1];
        for r in &self.records {
            offsets[r.start as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut by_start = vec![0u32; self.records.len()];
        for (i, r) in self.records.iter().enumerate() {
            let slot = &mut cursor[r.start as usize];
            by_start[*slot as usize] = i as u32;
            *slot += 1;
        }
        KnowledgeStore {
            concepts: self.concepts,
            concept_ids: self.concept_ids,
            records: self.records,
            offsets,
            by_start,
        }
    }
}

// ---------------------------------------------------------------------------
// ConceptNet dump ingestion

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub language: String,
    /// Abort on the first malformed line instead of counting and skipping it.
    pub strict: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            language: "en".into(),
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines: u64,
    pub assertions: u64,
    pub concepts: u64,
    pub other_language: u64,
    pub malformed: u64,
    pub missing_weight: u64,
    /// Line number of the first malformed line, if any.
    pub first_malformed: Option<u64>,
}

#[derive(Deserialize)]
struct EdgeInfo {
    weight: Option<f64>,
}

enum LineOutcome<'a> {
    Keep {
        start: String,
        relation: Relation,
        end: String,
        weight: f64,
    },
    OtherLanguage,
    MissingWeight,
    Malformed(&'a str),
}

/// Streams a ConceptNet assertions dump into a store.
///
/// Lines whose start and end concepts are not both in `options.language` are
/// dropped. Malformed lines are counted and skipped unless `options.strict`
/// is set, in which case the first one aborts ingestion with its line number.
pub fn ingest_conceptnet<R: BufRead>(
    mut reader: R,
    options: &IngestOptions,
) -> Result<(KnowledgeStore, IngestReport)> {
    let mut builder = StoreBuilder::default();
    let mut report = IngestReport::default();
    let mut buf = String::new();
    let lang_prefix = format!("/c/{}/", options.language);

    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        report.lines += 1;
        let line = buf.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        match parse_line(line, &lang_prefix) {
            LineOutcome::Keep {
                start,
                relation,
                end,
                weight,
            } => {
                builder.push(&start, relation, &end, weight)?;
                report.assertions += 1;
            }
            LineOutcome::OtherLanguage => report.other_language += 1,
            LineOutcome::MissingWeight => report.missing_weight += 1,
            LineOutcome::Malformed(reason) => {
                if options.strict {
                    return Err(Error::parse(report.lines as usize, reason));
                }
                report.malformed += 1;
                report.first_malformed.get_or_insert(report.lines);
            }
        }
    }
    let store = builder.finish();
    report.concepts = store.concept_count() as u64;
    Ok((store, report))
}

fn parse_line<'a>(line: &'a str, lang_prefix: &str) -> LineOutcome<'a> {
    let mut fields = line.split('\t');
    let (Some(_edge), Some(rel), Some(start), Some(end), Some(meta), None) = (
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
    ) else {
        return LineOutcome::Malformed("expected 5 tab-separated fields");
    };

    if !start.starts_with("/c/") || !end.starts_with("/c/") {
        return LineOutcome::Malformed("concept URI must start with /c/");
    }
    if !start.starts_with(lang_prefix) || !end.starts_with(lang_prefix) {
        return LineOutcome::OtherLanguage;
    }
    let Some(relation) = rel.strip_prefix("/r/").and_then(Relation::from_name) else {
        return LineOutcome::Malformed("unknown relation");
    };
    let (Some(start), Some(end)) = (concept_text(start), concept_text(end)) else {
        return LineOutcome::Malformed("empty concept");
    };
    let info: EdgeInfo = match serde_json::from_str(meta) {
        Ok(info) => info,
        Err(_) => return LineOutcome::Malformed("metadata is not a JSON object"),
    };
    match info.weight {
        None => LineOutcome::MissingWeight,
        Some(w) if w.is_finite() && w > 0.0 => LineOutcome::Keep {
            start,
            relation,
            end,
            weight: w,
        },
        Some(_) => LineOutcome::Malformed("weight must be positive"),
    }
}

/// Surface text of a concept URI: `/c/en/blood_cell/n` → `blood cell`.
pub fn concept_text(uri: &str) -> Option<String> {
    let term = uri.strip_prefix("/c/")?.split('/').nth(1)?;
    let text = term
        .split('_')
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    (!text.is_empty()).then_some(text)
}

// ---------------------------------------------------------------------------
// Binary persistence
//
// layout: MAGIC | VERSION | payload | crc32(payload) as u32 LE
// payload: concept_count u32, (len u32, utf8 bytes)*,
//          record_count u64, (start u32, end u32, relation u8, raw f64)*

const MAGIC: &[u8; 8] = b"CKECEKS\0";
const VERSION: u8 = 1;

impl KnowledgeStore {
    pub fn save<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut payload = Vec::with_capacity(
            self.records.len() * 17 + self.concepts.iter().map(|c| c.len() + 4).sum::<usize>() + 12,
        );
        payload.extend_from_slice(&(self.concepts.len() as u32).to_le_bytes());
        for c in &self.concepts {
            payload.extend_from_slice(&(c.len() as u32).to_le_bytes());
            payload.extend_from_slice(c.as_bytes());
        }
        payload.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            payload.extend_from_slice(&r.start.to_le_bytes());
            payload.extend_from_slice(&r.end.to_le_bytes());
            payload.push(r.relation.code());
            payload.extend_from_slice(&r.raw.to_le_bytes());
        }
        let crc = crc32fast::hash(&payload);
        sink.write_all(MAGIC)?;
        sink.write_all(&[VERSION])?;
        sink.write_all(&payload)?;
        sink.write_all(&crc.to_le_bytes())?;
        sink.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        if bytes.len() < MAGIC.len() + 1 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("missing magic header".into()));
        }
        let version = bytes[MAGIC.len()];
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let body = &bytes[MAGIC.len() + 1..];
        if body.len() < 4 {
            return Err(Error::Format("truncated file".into()));
        }
        let (payload, crc) = body.split_at(body.len() - 4);
        let expected = u32::from_le_bytes(crc.try_into().unwrap());
        if crc32fast::hash(payload) != expected {
            return Err(Error::Format("checksum mismatch".into()));
        }

        let mut cur = Cursor {
            buf: payload,
            pos: 0,
        };
        let n_concepts = cur.u32()? as usize;
        let mut builder = StoreBuilder::default();
        for _ in 0..n_concepts {
            let len = cur.u32()? as usize;
            let text = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| Error::Format("concept is not UTF-8".into()))?;
            let before = builder.concepts.len();
            builder.intern(text)?;
            if builder.concepts.len() == before {
                return Err(Error::Format(format!("duplicate concept `{text}`")));
            }
        }
        let n_records = cur.u64()? as usize;
        builder.records.reserve(n_records.min(payload.len() / 17));
        for _ in 0..n_records {
            let start = cur.u32()?;
            let end = cur.u32()?;
            let relation = Relation::from_code(cur.take(1)?[0])
                .ok_or_else(|| Error::Format("unknown relation code".into()))?;
            let raw = f64::from_le_bytes(cur.take(8)?.try_into().unwrap());
            if start as usize >= n_concepts || end as usize >= n_concepts {
                return Err(Error::Format("concept id out of range".into()));
            }
            builder.records.push(Record {
                start,
                end,
                relation,
                raw,
                scaled: min_max_scale(raw, CONFIDENCE_BOUNDS),
            });
        }
        if cur.pos != payload.len() {
            return Err(Error::Format("trailing bytes after records".into()));
        }
        Ok(builder.finish())
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("truncated file".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(rel: &str, start: &str, end: &str, weight: f64) -> String {
        format!(
            "/a/[{rel}/,{start}/,{end}/]\t{rel}\t{start}\t{end}\t{{\"dataset\": \"/d/conceptnet/4/en\", \"weight\": {weight}}}\n"
        )
    }

    fn ingest(src: &str) -> (KnowledgeStore, IngestReport) {
        ingest_conceptnet(src.as_bytes(), &IngestOptions::default()).unwrap()
    }

    #[test]
    fn ingests_example_triple() {
        let (store, report) = ingest(&line(
            "/r/CausesDesire",
            "/c/en/loneliness",
            "/c/en/socialize",
            3.464,
        ));
        assert_eq!(report.assertions, 1);
        let got = store.query_by_keyword("loneliness");
        assert_eq!(got.len(), 1);
        let a = &got[0];
        assert_eq!(
            (a.start.as_str(), a.relation, a.end.as_str()),
            ("loneliness", Relation::CausesDesire, "socialize")
        );
        assert_eq!(a.raw_confidence, 3.464);
        assert!((a.scaled_confidence - 0.2738).abs() < 5e-4);
    }

    #[test]
    fn language_filter_and_uri_normalization() {
        let src = [
            line("/r/IsA", "/c/fr/peur", "/c/en/fear", 2.0),
            line(
                "/r/PartOf",
                "/c/en/blood_cell/n",
                "/c/en/blood/n/wn/body",
                2.0,
            ),
        ]
        .concat();
        let (store, report) = ingest(&src);
        assert_eq!(report.other_language, 1);
        assert_eq!(store.assertion_count(), 1);
        let a = &store.query_by_keyword("blood cell")[0];
        assert_eq!(a.end, "blood");
        assert!(store.query_by_keyword("peur").is_empty());
    }

    #[test]
    fn query_order_is_ingestion_order() {
        let src = [
            line("/r/IsA", "/c/en/fear", "/c/en/panic", 2.0),
            line("/r/IsA", "/c/en/cancer", "/c/en/disease", 2.0),
            line("/r/RelatedTo", "/c/en/fear", "/c/en/scared", 3.0),
        ]
        .concat();
        for _ in 0..2 {
            let (store, _) = ingest(&src);
            let ends: Vec<_> = store.query("fear").map(|a| a.end).collect();
            assert_eq!(ends, ["panic", "scared"]);
            assert!(store.query_by_keyword("unknown").is_empty());
        }
    }

    #[test]
    fn malformed_lines_tolerant_and_strict() {
        let src = [
            line("/r/IsA", "/c/en/fear", "/c/en/panic", 2.0),
            "garbage\n".to_string(),
            "/a/x\t/r/IsA\t/c/en/a\t/c/en/b\t{\"dataset\": \"x\"}\n".to_string(),
            "/a/x\t/r/NoSuchRel\t/c/en/a\t/c/en/b\t{\"weight\": 1.0}\n".to_string(),
        ]
        .concat();
        let (store, report) = ingest(&src);
        assert_eq!(store.assertion_count(), 1);
        assert_eq!(report.malformed, 2);
        assert_eq!(report.missing_weight, 1);
        assert_eq!(report.first_malformed, Some(2));

        let strict = IngestOptions {
            strict: true,
            ..Default::default()
        };
        match ingest_conceptnet(src.as_bytes(), &strict) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(Relation::IsA.display(), "is a");
        assert_eq!(Relation::RelatedTo.display(), "related to");
        assert_eq!(Relation::HasSubevent.display(), "has subevent");
        assert_eq!(Relation::PartOf.display(), "part of");
        assert_eq!(Relation::ExternalUrl.display(), "external url");
        assert_eq!(Relation::DbpediaKnownFor.display(), "dbpedia known for");
    }

    #[test]
    fn relation_names_round_trip() {
        for &r in Relation::ALL {
            assert_eq!(Relation::from_name(r.name()), Some(r));
            assert_eq!(Relation::from_code(r.code()), Some(r));
        }
        assert_eq!(Relation::matching("dbpedia").len(), 10);
        assert_eq!(Relation::matching("SymbolOf"), vec![Relation::SymbolOf]);
        assert!(Relation::matching("Nope").is_empty());
    }

    #[test]
    fn save_load_round_trip() {
        let src = [
            line("/r/IsA", "/c/en/fear", "/c/en/panic", 2.0),
            line("/r/IsA", "/c/en/cancer", "/c/en/disease", 12.5),
            line("/r/RelatedTo", "/c/en/fear", "/c/en/scared", 3.0),
        ]
        .concat();
        let (store, _) = ingest(&src);
        let mut bytes = Vec::new();
        store.save(&mut bytes).unwrap();
        let loaded = KnowledgeStore::load(bytes.as_slice()).unwrap();
        assert_eq!(loaded.assertion_count(), 3);
        assert_eq!(loaded.concept_count(), store.concept_count());
        for key in ["fear", "cancer", "panic", "x"] {
            assert_eq!(loaded.query_by_keyword(key), store.query_by_keyword(key));
        }
    }

    #[test]
    fn load_rejects_bad_files() {
        assert!(matches!(
            KnowledgeStore::load(&b""[..]),
            Err(Error::Format(_))
        ));

        let mut bytes = Vec::new();
        KnowledgeStore::from_assertions(&[Assertion::new("a", Relation::IsA, "b", 2.0)])
            .unwrap()
            .save(&mut bytes)
            .unwrap();

        let mut wrong_version = bytes.clone();
        wrong_version[8] = 99;
        assert!(
            matches!(KnowledgeStore::load(wrong_version.as_slice()), Err(Error::Format(m)) if m.contains("version"))
        );

        let truncated = &bytes[..bytes.len() - 3];
        assert!(KnowledgeStore::load(truncated).is_err());

        let mut flipped = bytes.clone();
        flipped[12] ^= 0xff;
        assert!(
            matches!(KnowledgeStore::load(flipped.as_slice()), Err(Error::Format(m)) if m.contains("checksum"))
        );
    }

    fn arb_assertions() -> impl Strategy<Value = Vec<(u8, u8, usize, f64)>> {
        prop::collection::vec(
            (0u8..12, 0u8..12, 0..Relation::ALL.len(), 0.01f64..15.0),
            0..60,
        )
    }

    fn build(rows: &[(u8, u8, usize, f64)]) -> String {
        rows.iter()
            .map(|&(s, e, r, w)| {
                line(
                    &format!("/r/{}", Relation::ALL[r].name()),
                    &format!("/c/en/c{s}"),
                    &format!("/c/en/c{e}"),
                    w,
                )
            })
            .collect()
    }

    proptest! {
        #[test]
        fn store_invariants(rows in arb_assertions()) {
            let src = build(&rows);
            let (store, _) = ingest(&src);
            prop_assert_eq!(store.assertion_count(), rows.len());

            let mut total = 0;
            for c in 0..12 {
                let key = format!("c{c}");
                for a in store.query(&key) {
                    prop_assert_eq!(&a.start, &key);
                    let expected = ((a.raw_confidence.clamp(1.0, 10.0)) - 1.0) / 9.0;
                    prop_assert!((a.scaled_confidence - expected).abs() < 1e-15);
                    total += 1;
                }
            }
            prop_assert_eq!(total, store.assertion_count());

            let (again, _) = ingest(&src);
            let (mut b1, mut b2) = (Vec::new(), Vec::new());
            store.save(&mut b1).unwrap();
            again.save(&mut b2).unwrap();
            prop_assert_eq!(b1, b2);
        }
    }
}
