//! Annotated-embedding corpus reader and supervised sense bootstrapping.
//!
//! The corpus is JSONL, one sentence per line:
//!
//! ```text
//! {"sentence_id": "d000.s000", "dim": 4, "tokens": [
//!   {"text": "cooks", "lemma": "cook", "pos": "v", "sense_key": "cook%2:36:00::",
//!    "vector": [0.1, 0.2, 0.3, 0.4]}, ...]}
//! ```
//!
//! Token vectors arrive already aligned to word-level tokens; multi-token
//! spans are a single token record.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::{Pos, SenseInventory, SenseKey};
use crate::store::{Provenance, SenseEmbeddingStore, StoreEntry};
use crate::vectorspace::{Embedding, MeanAccumulator};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {0}: malformed JSON sentence record")]
    MalformedJson(usize),
    #[error("line {0}: vector dimension differs from the corpus dimension")]
    DimensionMismatch(usize),
    #[error("line {0}: bad sense key")]
    BadSenseKey(usize),
    #[error("line {0}: unknown POS tag")]
    BadPos(usize),
    #[error("line {0}: vector is empty or non-finite")]
    BadVector(usize),
    #[error("line {line}: duplicate sentence id {id:?}")]
    DuplicateSentenceId { line: usize, id: String },
    #[error("corpus contains no sense-annotated tokens")]
    NoAnnotations,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedToken {
    pub text: String,
    pub lemma: String,
    pub pos: Option<Pos>,
    pub sense_key: Option<SenseKey>,
    pub vector: Embedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedSentence {
    pub sentence_id: String,
    pub tokens: Vec<AnnotatedToken>,
}

impl AnnotatedSentence {
    /// `(sense_key, vector)` for every annotated token, in token order.
    pub fn annotations(&self) -> impl Iterator<Item = (&SenseKey, &Embedding)> {
        self.tokens
            .iter()
            .filter_map(|t| t.sense_key.as_ref().map(|k| (k, &t.vector)))
    }

    pub fn dim(&self) -> Option<usize> {
        self.tokens.first().map(|t| t.vector.dim())
    }
}

#[derive(Deserialize, Serialize)]
struct RawToken {
    text: String,
    lemma: String,
    #[serde(default)]
    pos: Option<String>,
    #[serde(default)]
    sense_key: Option<String>,
    vector: Vec<f32>,
}

#[derive(Deserialize, Serialize)]
struct RawSentence {
    sentence_id: String,
    dim: usize,
    tokens: Vec<RawToken>,
}

/// Streaming JSONL reader. Blank lines are skipped.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    dim: Option<usize>,
    seen: HashSet<String>,
}

pub fn load_annotated_corpus<R: BufRead>(reader: R) -> CorpusReader<R> {
    CorpusReader {
        lines: reader.lines(),
        line_no: 0,
        dim: None,
        seen: HashSet::new(),
    }
}

impl<R: BufRead> CorpusReader<R> {
    fn parse_line(&mut self, line: &str) -> Result<AnnotatedSentence, CorpusError> {
        let n = self.line_no;
        let raw: RawSentence =
            serde_json::from_str(line).map_err(|_| CorpusError::MalformedJson(n))?;
        let expected = *self.dim.get_or_insert(raw.dim);
        if raw.dim != expected {
            return Err(CorpusError::DimensionMismatch(n));
        }
        let mut tokens = Vec::with_capacity(raw.tokens.len());
        for t in raw.tokens {
            if t.vector.len() != expected {
                return Err(CorpusError::DimensionMismatch(n));
            }
            let pos = match t.pos.as_deref() {
                None => None,
                Some(p) => Some(p.parse::<Pos>().map_err(|_| CorpusError::BadPos(n))?),
            };
            let sense_key = match t.sense_key.as_deref() {
                None => None,
                Some(k) => Some(SenseKey::parse(k).map_err(|_| CorpusError::BadSenseKey(n))?),
            };
            tokens.push(AnnotatedToken {
                text: t.text,
                lemma: t.lemma,
                pos,
                sense_key,
                vector: Embedding::new(t.vector).map_err(|_| CorpusError::BadVector(n))?,
            });
        }
        let sentence_id = raw.sentence_id;
        if !self.seen.insert(sentence_id.clone()) {
            return Err(CorpusError::DuplicateSentenceId {
                line: n,
                id: sentence_id,
            });
        }
        Ok(AnnotatedSentence {
            sentence_id,
            tokens,
        })
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<AnnotatedSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(self.parse_line(&line));
        }
    }
}

/// Writes one sentence as a corpus JSONL line.
pub fn write_sentence<W: Write>(mut writer: W, sentence: &AnnotatedSentence) -> io::Result<()> {
    let raw = RawSentence {
        sentence_id: sentence.sentence_id.clone(),
        dim: sentence.dim().unwrap_or(0),
        tokens: sentence
            .tokens
            .iter()
            .map(|t| RawToken {
                text: t.text.clone(),
                lemma: t.lemma.clone(),
                pos: t.pos.map(|p| p.as_char().to_string()),
                sense_key: t.sense_key.as_ref().map(|k| k.to_string()),
                vector: t.vector.as_slice().to_vec(),
            })
            .collect(),
    };
    serde_json::to_writer(&mut writer, &raw)?;
    writer.write_all(b"\n")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BootstrapSummary {
    pub sentences: usize,
    pub tokens: usize,
    pub annotated_tokens: usize,
    pub senses: usize,
    /// Distinct annotated keys absent from the supplied inventory.
    pub unknown_senses: usize,
}

/// Averages the contextual vectors of every annotated sense, in corpus order.
///
/// Keys missing from `inventory` are kept; they are only counted and logged.
pub fn bootstrap_sense_embeddings<I>(
    corpus: I,
    inventory: Option<&SenseInventory>,
) -> Result<(SenseEmbeddingStore, BootstrapSummary), CorpusError>
where
    I: IntoIterator<Item = Result<AnnotatedSentence, CorpusError>>,
{
    let mut sums: BTreeMap<SenseKey, MeanAccumulator> = BTreeMap::new();
    let mut summary = BootstrapSummary::default();
    let mut dim = None;
    for sentence in corpus {
        let sentence = sentence?;
        summary.sentences += 1;
        summary.tokens += sentence.tokens.len();
        for (key, vector) in sentence.annotations() {
            let d = *dim.get_or_insert(vector.dim());
            summary.annotated_tokens += 1;
            sums.entry(key.clone())
                .or_insert_with(|| MeanAccumulator::new(d))
                .add(vector.as_slice())
                .map_err(|_| CorpusError::DimensionMismatch(summary.sentences))?;
        }
    }
    let dim = dim.ok_or(CorpusError::NoAnnotations)?;

    let mut store = SenseEmbeddingStore::new(dim);
    let mut unknown = Vec::new();
    for (key, acc) in sums {
        if inventory.is_some_and(|inv| !inv.contains_sense(&key)) {
            unknown.push(key.to_string());
        }
        let vector = acc.finish().expect("accumulator has at least one vector");
        let support = acc.count() as u32;
        store
            .insert(
                key,
                StoreEntry {
                    vector,
                    provenance: Provenance::Annotated,
                    support,
                },
            )
            .expect("uniform dimension");
    }
    if !unknown.is_empty() {
        log::warn!(
            "{} annotated sense keys are not in the inventory (first: {})",
            unknown.len(),
            unknown[0]
        );
    }
    summary.senses = store.len();
    summary.unknown_senses = unknown.len();
    Ok((store, summary))
}
