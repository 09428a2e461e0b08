//! NRC VAD emotion lexicon and the score normalizations built on it.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Default bounds for ConceptNet assertion weights.
pub const CONFIDENCE_BOUNDS: NormalizationBounds = NormalizationBounds {
    min: 1.0,
    max: 10.0,
};

/// Range of `‖(V − 1/2, A/2)‖₂` over `[0,1]²`.
pub const INTENSITY_BOUNDS: NormalizationBounds = NormalizationBounds {
    min: 0.0,
    max: std::f64::consts::FRAC_1_SQRT_2,
};

/// Intensity assigned to concepts missing from the lexicon.
pub const DEFAULT_INTENSITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct VadEntry {
    pub word: String,
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBounds {
    min: f64,
    max: f64,
}

impl NormalizationBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Invalid(format!(
                "normalization bounds require min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

/// Min-max scaling with the input clamped to `bounds` first, so the result is
/// always in `[0, 1]`. NaN maps to 0.
pub fn min_max_scale(value: f64, bounds: NormalizationBounds) -> f64 {
    let clamped = if value.is_nan() {
        bounds.min
    } else {
        value.clamp(bounds.min, bounds.max)
    };
    (clamped - bounds.min) / (bounds.max - bounds.min)
}

/// Word → VAD scores. Immutable once loaded.
#[derive(Debug, Clone, Default)]
pub struct VadLexicon {
    entries: HashMap<String, VadEntry>,
}

impl VadLexicon {
    /// Reads a tab-separated `word valence arousal dominance` file with a
    /// header row. Blank lines are ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut lines = reader.lines();

        match lines.next() {
            None => return Ok(Self { entries }),
            Some(header) => {
                let header = header?;
                let cols: Vec<String> = header
                    .trim_start_matches('\u{feff}')
                    .split('\t')
                    .map(|c| c.trim().to_lowercase())
                    .collect();
                let known_first = matches!(cols.first().map(String::as_str), Some("word" | "term"));
                if !known_first || cols[1..] != ["valence", "arousal", "dominance"] {
                    return Err(Error::parse(
                        1,
                        "expected header `word\\tvalence\\tarousal\\tdominance`",
                    ));
                }
            }
        }

        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = parse_row(&line, line_no)?;
            if entries.contains_key(&entry.word) {
                return Err(Error::Duplicate {
                    line: line_no,
                    key: entry.word,
                });
            }
            entries.insert(entry.word.clone(), entry);
        }
        Ok(Self { entries })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = VadEntry>) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, entry) in entries.into_iter().enumerate() {
            validate_entry(&entry, i + 1)?;
            if map.contains_key(&entry.word) {
                return Err(Error::Duplicate {
                    line: i + 1,
                    key: entry.word,
                });
            }
            map.insert(entry.word.clone(), entry);
        }
        Ok(Self { entries: map })
    }

    pub fn get(&self, word: &str) -> Option<&VadEntry> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VadEntry> {
        self.entries.values()
    }
}

pub fn load_vad<R: BufRead>(reader: R) -> Result<VadLexicon> {
    VadLexicon::from_reader(reader)
}

fn parse_row(line: &str, line_no: usize) -> Result<VadEntry> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            line_no,
            format!("expected 4 tab-separated columns, found {}", fields.len()),
        ));
    }
    let score = |i: usize, name: &str| -> Result<f64> {
        fields[i]
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::parse(line_no, format!("{name} `{}` is not a number", fields[i])))
    };
    let entry = VadEntry {
        word: fields[0].trim().to_lowercase(),
        valence: score(1, "valence")?,
        arousal: score(2, "arousal")?,
        dominance: score(3, "dominance")?,
    };
    validate_entry(&entry, line_no)?;
    Ok(entry)
}

fn validate_entry(entry: &VadEntry, line_no: usize) -> Result<()> {
    if entry.word.is_empty() {
        return Err(Error::parse(line_no, "empty word"));
    }
    if entry.word != entry.word.trim() || entry.word != entry.word.to_lowercase() {
        return Err(Error::parse(
            line_no,
            format!("word `{}` is not normalized", entry.word),
        ));
    }
    for (name, v) in [
        ("valence", entry.valence),
        ("arousal", entry.arousal),
        ("dominance", entry.dominance),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::parse(line_no, format!("{name} {v} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Emotion intensity of a concept: the scaled distance of `(V − 1/2, A/2)`
/// from the origin, or [`DEFAULT_INTENSITY`] when the whole concept string is
/// not a lexicon entry.
pub fn emotion_intensity(lexicon: &VadLexicon, concept: &str) -> f64 {
    match lexicon.get(concept) {
        Some(entry) => {
            let norm = (entry.valence - 0.5).hypot(entry.arousal / 2.0);
            min_max_scale(norm, INTENSITY_BOUNDS)
        }
        None => DEFAULT_INTENSITY,
    }
}
