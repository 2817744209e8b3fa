//! Sense-specific dictionary vectors built from glosses, and their merge
//! with sense vectors into a `2D` concatenated store.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedSentence, CorpusError};
use crate::inventory::{SenseInventory, SenseKey};
use crate::store::{Provenance, SenseEmbeddingStore, StoreEntry};
use crate::vectorspace::{concat_sense, mean, Embedding, VectorError};

#[derive(Debug, Error)]
pub enum GlossError {
    #[error("sense {0} is not in the inventory")]
    UnknownSense(String),
    #[error("gloss record id {0:?} is not a sense key")]
    BadSenseKey(String),
    #[error("gloss record for {key} has {found} vectors, plan has {expected} tokens")]
    PlanMismatch {
        key: SenseKey,
        expected: usize,
        found: usize,
    },
    #[error("no gloss vectors to average")]
    EmptyInput,
    #[error("dimension mismatch: sense store {sense}, gloss store {gloss}")]
    DimensionMismatch { sense: usize, gloss: usize },
    #[error("no gloss vector for {0}")]
    MissingGloss(SenseKey),
    #[error("duplicate gloss record for {0}")]
    DuplicateGloss(SenseKey),
    #[error("{key}: {source}")]
    Vector { key: SenseKey, source: VectorError },
    #[error(transparent)]
    Dictionary(VectorError),
    #[error("line {0}: malformed gloss plan")]
    MalformedPlan(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Token sequence handed to the embedding provider for one sense.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossTokenPlan {
    pub sense_key: SenseKey,
    pub tokens: Vec<String>,
}

fn lemma_words(lemma: &str) -> impl Iterator<Item = String> + '_ {
    lemma.split('_').filter(|w| !w.is_empty()).map(str::to_string)
}

/// `[sense lemma] ++ synset lemmas ++ gloss words`, lemmas split on `_`.
pub fn build_gloss_token_plan(
    sense: &SenseKey,
    inv: &SenseInventory,
) -> Result<GlossTokenPlan, GlossError> {
    let synset = inv
        .synset_of(sense)
        .ok_or_else(|| GlossError::UnknownSense(sense.to_string()))?;
    // prefer the synset's surface casing of the sense lemma
    let own = synset
        .lemmas
        .iter()
        .find(|l| l.to_lowercase() == sense.lemma())
        .map(String::as_str)
        .unwrap_or(sense.lemma());
    let mut tokens: Vec<String> = lemma_words(own).collect();
    for l in &synset.lemmas {
        tokens.extend(lemma_words(l));
    }
    tokens.extend(synset.gloss.split_whitespace().map(str::to_string));
    Ok(GlossTokenPlan {
        sense_key: sense.clone(),
        tokens,
    })
}

/// Plans for every inventory sense, ascending by key.
pub fn build_all_plans(inv: &SenseInventory) -> Vec<GlossTokenPlan> {
    inv.sense_keys()
        .map(|k| build_gloss_token_plan(k, inv).expect("inventory senses resolve"))
        .collect()
}

pub fn write_plans<W: Write>(mut writer: W, plans: &[GlossTokenPlan]) -> io::Result<()> {
    for p in plans {
        serde_json::to_writer(&mut writer, p)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_plans<R: BufRead>(reader: R) -> Result<Vec<GlossTokenPlan>, GlossError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|_| GlossError::MalformedPlan(i + 1))?);
    }
    Ok(out)
}

pub fn build_dictionary_embedding(token_vectors: &[Embedding]) -> Result<Embedding, GlossError> {
    mean(token_vectors).map_err(|e| match e {
        VectorError::EmptyInput => GlossError::EmptyInput,
        other => GlossError::Dictionary(other),
    })
}

/// Reads provider output (one record per plan, `sentence_id` = sense key)
/// into a store of dictionary vectors. With an inventory, each record's
/// vector count is checked against its plan.
pub fn build_gloss_store<I>(
    records: I,
    inv: Option<&SenseInventory>,
) -> Result<SenseEmbeddingStore, GlossError>
where
    I: IntoIterator<Item = Result<AnnotatedSentence, CorpusError>>,
{
    let mut store: Option<SenseEmbeddingStore> = None;
    for record in records {
        let record = record?;
        let key = SenseKey::parse(&record.sentence_id)
            .map_err(|_| GlossError::BadSenseKey(record.sentence_id.clone()))?;
        if let Some(inv) = inv {
            let plan = build_gloss_token_plan(&key, inv)?;
            if plan.tokens.len() != record.tokens.len() {
                return Err(GlossError::PlanMismatch {
                    key,
                    expected: plan.tokens.len(),
                    found: record.tokens.len(),
                });
            }
        }
        let vectors: Vec<Embedding> = record.tokens.into_iter().map(|t| t.vector).collect();
        let vector = mean(&vectors).map_err(|e| match e {
            VectorError::EmptyInput => GlossError::EmptyInput,
            source => GlossError::Vector {
                key: key.clone(),
                source,
            },
        })?;
        let store = store.get_or_insert_with(|| SenseEmbeddingStore::new(vector.dim()));
        if store.contains(&key) {
            return Err(GlossError::DuplicateGloss(key));
        }
        let found = vector.dim();
        store
            .insert(
                key,
                StoreEntry {
                    vector,
                    provenance: Provenance::Gloss,
                    support: vectors.len() as u32,
                },
            )
            .map_err(|_| GlossError::DimensionMismatch {
                sense: store.dim(),
                gloss: found,
            })?;
    }
    store.ok_or(GlossError::EmptyInput)
}

/// `concat_sense(sense, gloss)` for every key of `sense_store`.
pub fn merge_concat(
    sense_store: &SenseEmbeddingStore,
    gloss_store: &SenseEmbeddingStore,
) -> Result<SenseEmbeddingStore, GlossError> {
    if sense_store.dim() != gloss_store.dim() {
        return Err(GlossError::DimensionMismatch {
            sense: sense_store.dim(),
            gloss: gloss_store.dim(),
        });
    }
    let mut out = SenseEmbeddingStore::new(sense_store.dim() * 2);
    for (key, entry) in sense_store.iter() {
        let gloss = gloss_store
            .vector(key)
            .ok_or_else(|| GlossError::MissingGloss(key.clone()))?;
        let joined = concat_sense(&entry.vector, gloss).map_err(|source| GlossError::Vector {
            key: key.clone(),
            source,
        })?;
        out.insert(
            key.clone(),
            StoreEntry {
                vector: joined.into_embedding(),
                provenance: Provenance::Concat,
                support: entry.support,
            },
        )
        .expect("2D output");
    }
    Ok(out)
}
