//! Full-coverage imputation over the WordNet ontology.
//!
//! Annotated sense vectors are pooled bottom-up into synset, hypernym and
//! lexname vectors. A sense without an annotated vector then takes, in
//! order of preference, its synset's vector, the mean of its direct
//! hypernyms' vectors, or its lexname's vector.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::inventory::{SenseInventory, SenseKey, SynsetId};
use crate::store::{Provenance, SenseEmbeddingStore, StoreEntry};
use crate::vectorspace::{mean, Embedding};

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error("entry {0} is not annotated; synset pooling takes annotated vectors only")]
    NonAnnotatedInput(SenseKey),
    #[error("entry {0} has provenance {1}, which cannot be propagated")]
    UnsupportedProvenance(SenseKey, Provenance),
}

/// Pooled vectors at each level of abstraction.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionTables {
    pub synset: BTreeMap<SynsetId, Embedding>,
    pub hypernym: BTreeMap<SynsetId, Embedding>,
    pub lexname: BTreeMap<&'static str, Embedding>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub annotated: usize,
    pub synset: usize,
    pub hypernym: usize,
    pub lexname: usize,
    pub uncovered: usize,
    pub uncovered_keys: Vec<SenseKey>,
}

impl CoverageReport {
    pub fn total(&self) -> usize {
        self.annotated + self.synset + self.hypernym + self.lexname + self.uncovered
    }
}

/// Mean of the annotated sense vectors of each synset.
pub fn compute_synset_embeddings(
    store: &SenseEmbeddingStore,
    inv: &SenseInventory,
) -> Result<BTreeMap<SynsetId, Embedding>, PropagationError> {
    if let Some((key, _)) = store
        .iter()
        .find(|(_, e)| e.provenance != Provenance::Annotated)
    {
        return Err(PropagationError::NonAnnotatedInput(key.clone()));
    }
    let synsets: Vec<SynsetId> = inv.synsets().map(|s| s.id).collect();
    let pooled: Vec<(SynsetId, Embedding)> = synsets
        .par_iter()
        .filter_map(|&id| {
            let members: Vec<&Embedding> = inv
                .senses_of_synset(id)
                .iter()
                .filter_map(|k| store.vector(k))
                .collect();
            if members.is_empty() {
                return None;
            }
            Some((id, mean(members).expect("uniform store dimension")))
        })
        .collect();
    Ok(pooled.into_iter().collect())
}

/// For each hypernym target `h`: mean over the embedded members of
/// `{direct hyponyms of h} ∪ {h}`.
pub fn compute_hypernym_embeddings(
    synset_emb: &BTreeMap<SynsetId, Embedding>,
    inv: &SenseInventory,
) -> BTreeMap<SynsetId, Embedding> {
    let targets: Vec<SynsetId> = inv.hypernym_targets().collect();
    let pooled: Vec<(SynsetId, Embedding)> = targets
        .par_iter()
        .filter_map(|&h| {
            let mut group: BTreeSet<SynsetId> = inv.hyponyms(h).collect();
            group.insert(h);
            let members: Vec<&Embedding> = group.iter().filter_map(|id| synset_emb.get(id)).collect();
            if members.is_empty() {
                return None;
            }
            Some((h, mean(members).expect("uniform store dimension")))
        })
        .collect();
    pooled.into_iter().collect()
}

/// Mean of the embedded synsets sharing each lexicographer file.
pub fn compute_lexname_embeddings(
    synset_emb: &BTreeMap<SynsetId, Embedding>,
    inv: &SenseInventory,
) -> BTreeMap<&'static str, Embedding> {
    let mut groups: BTreeMap<&'static str, Vec<&Embedding>> = BTreeMap::new();
    for (id, e) in synset_emb {
        if let Some(s) = inv.synset(*id) {
            groups.entry(s.lexname()).or_default().push(e);
        }
    }
    groups
        .into_iter()
        .map(|(name, members)| (name, mean(members).expect("non-empty group")))
        .collect()
}

/// All three tables, each level built from the ones below it.
pub fn compute_tables(
    store: &SenseEmbeddingStore,
    inv: &SenseInventory,
) -> Result<AbstractionTables, PropagationError> {
    let synset = compute_synset_embeddings(store, inv)?;
    let hypernym = compute_hypernym_embeddings(&synset, inv);
    let lexname = compute_lexname_embeddings(&synset, inv);
    Ok(AbstractionTables {
        synset,
        hypernym,
        lexname,
    })
}

fn impute(
    key: &SenseKey,
    inv: &SenseInventory,
    tables: &AbstractionTables,
) -> Option<(Embedding, Provenance)> {
    let synset = inv.synset_of(key)?;
    if let Some(v) = tables.synset.get(&synset.id) {
        return Some((v.clone(), Provenance::Synset));
    }
    let hypernyms: BTreeSet<SynsetId> = synset.hypernyms.iter().copied().collect();
    let pooled: Vec<&Embedding> = hypernyms
        .iter()
        .filter_map(|h| tables.hypernym.get(h))
        .collect();
    if !pooled.is_empty() {
        return Some((mean(pooled).expect("non-empty"), Provenance::Hypernym));
    }
    tables
        .lexname
        .get(synset.lexname())
        .map(|v| (v.clone(), Provenance::Lexname))
}

/// Fills every inventory sense missing from `store`.
///
/// Tables are pooled from the annotated entries only, so entries imputed by
/// an earlier run are left as they are and a full store comes back unchanged.
pub fn propagate_full_coverage(
    store: &SenseEmbeddingStore,
    inv: &SenseInventory,
) -> Result<(SenseEmbeddingStore, CoverageReport), PropagationError> {
    if let Some((key, e)) = store.iter().find(|(_, e)| {
        matches!(e.provenance, Provenance::Gloss | Provenance::Concat)
    }) {
        return Err(PropagationError::UnsupportedProvenance(
            key.clone(),
            e.provenance,
        ));
    }
    let mut annotated = store.clone();
    annotated.retain(|_, e| e.provenance == Provenance::Annotated);
    let tables = compute_tables(&annotated, inv)?;

    let mut out = store.clone();
    let mut report = CoverageReport::default();
    for key in inv.sense_keys() {
        let provenance = match store.get(key) {
            Some(e) => e.provenance,
            None => match impute(key, inv, &tables) {
                Some((vector, provenance)) => {
                    out.insert(
                        key.clone(),
                        StoreEntry {
                            vector,
                            provenance,
                            support: 0,
                        },
                    )
                    .expect("pooled vectors share the store dimension");
                    provenance
                }
                None => {
                    report.uncovered += 1;
                    report.uncovered_keys.push(key.clone());
                    continue;
                }
            },
        };
        match provenance {
            Provenance::Annotated => report.annotated += 1,
            Provenance::Synset => report.synset += 1,
            Provenance::Hypernym => report.hypernym += 1,
            Provenance::Lexname => report.lexname += 1,
            Provenance::Gloss | Provenance::Concat => unreachable!("rejected above"),
        }
    }
    Ok((out, report))
}
