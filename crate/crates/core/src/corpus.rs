//! EmpatheticDialogues loading and encoder/decoder text formatting.
//!
//! The dataset CSV is not quoted: commas inside text are written as the
//! literal `_comma_`, so rows are split on `,` and the token is unescaped
//! afterwards.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CLS: &str = "<CLS>";
pub const SEP: &str = "<SEP>";
pub const END: &str = "<END>";
const COMMA_ESCAPE: &str = "_comma_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Speaker,
    Listener,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    pub conversation_id: String,
    pub emotion: String,
    pub situation: String,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueExample {
    pub conversation_id: String,
    pub emotion: String,
    pub context: Vec<String>,
    pub target: String,
}

pub fn unescape(text: &str) -> String {
    text.replace(COMMA_ESCAPE, ",")
}

pub fn escape(text: &str) -> String {
    text.replace(',', COMMA_ESCAPE)
}

/// Reads a dataset split. Conversations keep their first-appearance order;
/// turns are ordered by utterance index.
pub fn load_dialogues<R: BufRead>(reader: R) -> Result<Vec<Dialogue>> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Ok(Vec::new()),
    };
    let cols: Vec<&str> = header
        .trim_start_matches('\u{feff}')
        .trim_end()
        .split(',')
        .collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))
    };
    let (i_conv, i_idx, i_emotion, i_prompt, i_utt) = (
        col("conv_id")?,
        col("utterance_idx")?,
        col("context")?,
        col("prompt")?,
        col("utterance")?,
    );
    let width = [i_conv, i_idx, i_emotion, i_prompt, i_utt]
        .into_iter()
        .max()
        .unwrap_or(0)
        + 1;

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Dialogue, Vec<(u32, String)>)> = HashMap::new();
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < width {
            return Err(Error::parse(
                line_no,
                format!("expected at least {width} columns, found {}", fields.len()),
            ));
        }
        let idx: u32 = fields[i_idx]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad utterance_idx `{}`", fields[i_idx])))?;
        let emotion = fields[i_emotion].trim();
        if emotion.is_empty() {
            return Err(Error::parse(line_no, "empty emotion label"));
        }
        let conv = fields[i_conv].trim().to_owned();
        let entry = groups.entry(conv.clone()).or_insert_with(|| {
            order.push(conv.clone());
            (
                Dialogue {
                    conversation_id: conv.clone(),
                    emotion: emotion.to_owned(),
                    situation: unescape(fields[i_prompt]),
                    turns: Vec::new(),
                },
                Vec::new(),
            )
        });
        entry.1.push((idx, unescape(fields[i_utt])));
    }

    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let (mut dialogue, mut rows) = groups.remove(&id).expect("grouped id");
        rows.sort_by_key(|(idx, _)| *idx);
        dialogue.turns = rows
            .into_iter()
            .filter(|(_, text)| !text.trim().is_empty())
            .map(|(idx, text)| Turn {
                role: if idx % 2 == 1 {
                    Role::Speaker
                } else {
                    Role::Listener
                },
                text,
            })
            .collect();
        if dialogue.turns.is_empty() {
            log::warn!("conversation {id} has no utterances, skipped");
            continue;
        }
        out.push(dialogue);
    }
    Ok(out)
}

/// One example per listener turn, with every earlier turn as context.
pub fn build_examples(dialogue: &Dialogue) -> Vec<DialogueExample> {
    dialogue
        .turns
        .iter()
        .enumerate()
        .filter(|(i, t)| t.role == Role::Listener && *i > 0)
        .map(|(i, t)| DialogueExample {
            conversation_id: dialogue.conversation_id.clone(),
            emotion: dialogue.emotion.clone(),
            context: dialogue.turns[..i].iter().map(|t| t.text.clone()).collect(),
            target: t.text.clone(),
        })
        .collect()
}

/// `<CLS> t1 <SEP> t2 <SEP> … <SEP>`, lowercased.
pub fn format_encoder_input<S: AsRef<str>>(context: &[S]) -> String {
    let mut out = String::from(CLS);
    for turn in context {
        out.push(' ');
        out.push_str(&turn.as_ref().to_lowercase());
        out.push(' ');
        out.push_str(SEP);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderInput {
    pub text: String,
    /// Character (not byte) offset of the first response character.
    pub loss_mask_boundary: usize,
}

/// `concepts <SEP> response <END>`, or `<SEP> response <END>` without concepts.
pub fn format_decoder_input(concepts: &str, target: &str) -> DecoderInput {
    let mut text = String::new();
    if !concepts.is_empty() {
        text.push_str(concepts);
        text.push(' ');
    }
    text.push_str(SEP);
    text.push(' ');
    let loss_mask_boundary = text.chars().count();
    text.push_str(&target.to_lowercase());
    text.push(' ');
    text.push_str(END);
    DecoderInput {
        text,
        loss_mask_boundary,
    }
}

/// One line of `process-corpus` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub conversation_id: String,
    pub emotion: String,
    pub encoder_input: String,
    pub decoder_input: String,
    pub loss_mask_boundary: usize,
    pub concepts_rendered: String,
}

impl CorpusRecord {
    pub fn new(example: &DialogueExample, concepts_rendered: String) -> Self {
        let decoder = format_decoder_input(&concepts_rendered, &example.target);
        Self {
            conversation_id: example.conversation_id.clone(),
            emotion: example.emotion.clone(),
            encoder_input: format_encoder_input(&example.context),
            decoder_input: decoder.text,
            loss_mask_boundary: decoder.loss_mask_boundary,
            concepts_rendered,
        }
    }
}
