//! Nearest-neighbour sense disambiguation.
//!
//! A target's contextual vector is scored by cosine against every indexed
//! sense that shares its lemma (and, in [`MatchMode::LemmaPos`], its POS).
//! Against a concatenated store the contextual vector is duplicated so it
//! lines up with the sense and dictionary halves.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AnnotatedSentence;
use crate::inventory::{normalize_lemma, Pos, SenseInventory, SenseKey};
use crate::store::{Provenance, SenseEmbeddingStore};
use crate::vectorspace::{cosine, duplicate_contextual, Embedding, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WsdError {
    #[error("sense store is empty")]
    EmptyStore,
    #[error("no store entry is also an inventory sense")]
    NoOverlap,
    #[error("store mixes concatenated and plain entries")]
    MixedSpaces,
    #[error("no indexed senses for lemma {lemma:?}")]
    NoCandidates { lemma: String, pos: Option<Pos> },
    #[error("lemma {0:?} is not in the inventory")]
    UnknownLemma(String),
    #[error("contextual vector has dimension {found}, index expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    LemmaOnly,
    /// Filters by POS when the target has one, else behaves like `LemmaOnly`.
    #[default]
    LemmaPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    Error,
    #[default]
    FirstSense,
}

/// Geometry of the indexed vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Plain,
    /// `[sense; dictionary]`, twice the contextual dimension.
    Concat,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub indexed: usize,
    pub dropped_not_in_inventory: usize,
    pub inventory_without_vector: usize,
}

impl IndexReport {
    /// Fraction of inventory senses that are indexed.
    pub fn coverage(&self) -> f64 {
        let total = self.indexed + self.inventory_without_vector;
        if total == 0 {
            0.0
        } else {
            self.indexed as f64 / total as f64
        }
    }
}

pub struct SenseIndex<'a> {
    inv: &'a SenseInventory,
    vectors: BTreeMap<SenseKey, Embedding>,
    space: Space,
    store_dim: usize,
    match_mode: MatchMode,
    fallback: Fallback,
    report: IndexReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disambiguation {
    /// Candidates by descending similarity, ties by ascending key.
    pub ranked: Vec<(SenseKey, f64)>,
    pub chosen: SenseKey,
    /// `None` when the choice came from the first-sense fallback.
    pub similarity: Option<f64>,
    pub used_fallback: bool,
}

/// Indexes the keys present in both the store and the inventory.
pub fn build_index<'a>(
    store: &SenseEmbeddingStore,
    inv: &'a SenseInventory,
    match_mode: MatchMode,
    fallback: Fallback,
) -> Result<SenseIndex<'a>, WsdError> {
    if store.is_empty() {
        return Err(WsdError::EmptyStore);
    }
    let concat = store.count_by_provenance(Provenance::Concat);
    let space = if concat == 0 {
        Space::Plain
    } else if concat == store.len() && store.dim().is_multiple_of(2) {
        Space::Concat
    } else {
        return Err(WsdError::MixedSpaces);
    };
    let mut report = IndexReport::default();
    let mut vectors = BTreeMap::new();
    for (key, entry) in store.iter() {
        if inv.contains_sense(key) {
            vectors.insert(key.clone(), entry.vector.clone());
        } else {
            report.dropped_not_in_inventory += 1;
        }
    }
    if vectors.is_empty() {
        return Err(WsdError::NoOverlap);
    }
    report.indexed = vectors.len();
    report.inventory_without_vector = inv.sense_count() - vectors.len();
    if report.dropped_not_in_inventory > 0 {
        log::warn!(
            "{} store keys are not inventory senses and were not indexed",
            report.dropped_not_in_inventory
        );
    }
    if report.inventory_without_vector > 0 {
        log::warn!(
            "{} inventory senses have no vector",
            report.inventory_without_vector
        );
    }
    Ok(SenseIndex {
        inv,
        vectors,
        space,
        store_dim: store.dim(),
        match_mode,
        fallback,
        report,
    })
}

impl<'a> SenseIndex<'a> {
    pub fn inventory(&self) -> &'a SenseInventory {
        self.inv
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn report(&self) -> &IndexReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, key: &SenseKey) -> Option<&Embedding> {
        self.vectors.get(key)
    }

    /// Dimension of the contextual vectors this index accepts.
    pub fn context_dim(&self) -> usize {
        match self.space {
            Space::Plain => self.store_dim,
            Space::Concat => self.store_dim / 2,
        }
    }

    fn effective_pos(&self, pos: Option<Pos>) -> Option<Pos> {
        match self.match_mode {
            MatchMode::LemmaOnly => None,
            MatchMode::LemmaPos => pos,
        }
    }

    /// Indexed senses eligible for `lemma`, ascending by key.
    pub fn candidates(&self, lemma: &str, pos: Option<Pos>) -> Vec<&SenseKey> {
        self.inv
            .senses_for_lemma(lemma, self.effective_pos(pos))
            .into_iter()
            .filter(|k| self.vectors.contains_key(*k))
            .collect()
    }

    /// Maps a contextual vector into the index space.
    pub fn align(&self, c: &[f32]) -> Result<Vec<f32>, WsdError> {
        let expected = self.context_dim();
        if c.len() != expected {
            return Err(WsdError::DimensionMismatch {
                expected,
                found: c.len(),
            });
        }
        Ok(match self.space {
            Space::Plain => c.to_vec(),
            Space::Concat => duplicate_contextual(c)?.as_slice().to_vec(),
        })
    }

    pub fn disambiguate(
        &self,
        c: &[f32],
        lemma: &str,
        pos: Option<Pos>,
    ) -> Result<Disambiguation, WsdError> {
        let query = self.align(c)?;
        let candidates = self.candidates(lemma, pos);
        if candidates.is_empty() {
            return self.fall_back(lemma, pos);
        }
        let mut ranked = candidates
            .into_iter()
            .map(|k| Ok((k.clone(), cosine(&query, self.vectors[k].as_slice())?)))
            .collect::<Result<Vec<_>, WsdError>>()?;
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (chosen, sim) = ranked[0].clone();
        Ok(Disambiguation {
            ranked,
            chosen,
            similarity: Some(sim),
            used_fallback: false,
        })
    }

    fn fall_back(&self, lemma: &str, pos: Option<Pos>) -> Result<Disambiguation, WsdError> {
        match self.fallback {
            Fallback::Error => Err(WsdError::NoCandidates {
                lemma: lemma.to_string(),
                pos,
            }),
            Fallback::FirstSense => {
                let first = self
                    .inv
                    .first_sense(lemma, self.effective_pos(pos))
                    .ok_or_else(|| WsdError::UnknownLemma(lemma.to_string()))?;
                Ok(Disambiguation {
                    ranked: Vec::new(),
                    chosen: first.clone(),
                    similarity: None,
                    used_fallback: true,
                })
            }
        }
    }
}

/// Which tokens of a sentence are disambiguated in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelector {
    /// Tokens carrying a gold sense key.
    #[default]
    Annotated,
    /// Tokens with a POS tag.
    Tagged,
    All,
}

impl TargetSelector {
    fn selects(self, token: &crate::corpus::AnnotatedToken) -> bool {
        match self {
            TargetSelector::Annotated => token.sense_key.is_some(),
            TargetSelector::Tagged => token.pos.is_some(),
            TargetSelector::All => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRecord {
    pub sentence_id: String,
    pub token_index: usize,
    pub gold: Option<SenseKey>,
    pub result: Result<Disambiguation, WsdError>,
}

fn token_lemma(token: &crate::corpus::AnnotatedToken) -> String {
    if token.lemma.trim().is_empty() {
        normalize_lemma(&token.text)
    } else {
        normalize_lemma(&token.lemma)
    }
}

/// One record per selected token, in input order. Per-token failures are
/// reported in the record and do not stop the batch. `threads > 1` scores
/// targets on a dedicated pool; the output is identical either way.
pub fn disambiguate_batch(
    idx: &SenseIndex<'_>,
    sentences: &[AnnotatedSentence],
    targets: TargetSelector,
    threads: usize,
) -> Result<Vec<BatchRecord>, WsdError> {
    let jobs: Vec<(&AnnotatedSentence, usize)> = sentences
        .iter()
        .flat_map(|s| {
            s.tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| targets.selects(t))
                .map(move |(i, _)| (s, i))
        })
        .collect();
    let run = |(s, i): &(&AnnotatedSentence, usize)| {
        let token = &s.tokens[*i];
        BatchRecord {
            sentence_id: s.sentence_id.clone(),
            token_index: *i,
            gold: token.sense_key.clone(),
            result: idx.disambiguate(token.vector.as_slice(), &token_lemma(token), token.pos),
        }
    };
    if threads <= 1 {
        return Ok(jobs.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| WsdError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| jobs.par_iter().map(run).collect()))
}

#[derive(Serialize)]
struct RecordLine<'r> {
    sentence_id: &'r str,
    token_index: usize,
    chosen: &'r str,
    similarity: Option<f64>,
    used_fallback: bool,
    ranked: Vec<(&'r str, f64)>,
}

#[derive(Serialize)]
struct ErrorLine<'r> {
    sentence_id: &'r str,
    token_index: usize,
    error: String,
}

/// Writes a batch record as JSONL, keeping at most `top_k` ranked entries.
pub fn write_batch_record<W: Write>(
    mut writer: W,
    record: &BatchRecord,
    top_k: Option<usize>,
) -> io::Result<()> {
    match &record.result {
        Ok(d) => {
            let keep = top_k.unwrap_or(d.ranked.len()).min(d.ranked.len());
            serde_json::to_writer(
                &mut writer,
                &RecordLine {
                    sentence_id: &record.sentence_id,
                    token_index: record.token_index,
                    chosen: d.chosen.as_str(),
                    similarity: d.similarity,
                    used_fallback: d.used_fallback,
                    ranked: d.ranked[..keep]
                        .iter()
                        .map(|(k, s)| (k.as_str(), *s))
                        .collect(),
                },
            )?;
        }
        Err(e) => {
            serde_json::to_writer(
                &mut writer,
                &ErrorLine {
                    sentence_id: &record.sentence_id,
                    token_index: record.token_index,
                    error: e.to_string(),
                },
            )?;
        }
    }
    writer.write_all(b"\n")
}
