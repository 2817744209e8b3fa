//! Sense embedding store and its text serialization.
//!
//! The file format is a `<count> <dim>` header followed by one line per
//! entry, `<sense_key> <provenance> <support_count> <v1> ... <vdim>`, in
//! ascending key order. Components are written with nine significant digits,
//! which is enough for `f32` values to survive a load/save cycle unchanged.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::SenseKey;
use crate::vectorspace::Embedding;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed store header")]
    MalformedHeader,
    #[error("header declares {expected} entries but {found} are present")]
    CountMismatch { expected: usize, found: usize },
    #[error("line {0}: malformed store entry")]
    MalformedLine(usize),
    #[error("line {0}: bad sense key")]
    BadSenseKey(usize),
    #[error("duplicate store key {0}")]
    DuplicateKey(SenseKey),
    #[error("dimension mismatch for {key}: expected {expected}, found {found}")]
    DimensionMismatch {
        key: SenseKey,
        expected: usize,
        found: usize,
    },
    #[error("annotated entry {0} has zero support")]
    ZeroSupport(SenseKey),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Where a stored vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Annotated,
    Synset,
    Hypernym,
    Lexname,
    Gloss,
    Concat,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Annotated => "annotated",
            Provenance::Synset => "synset",
            Provenance::Hypernym => "hypernym",
            Provenance::Lexname => "lexname",
            Provenance::Gloss => "gloss",
            Provenance::Concat => "concat",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "annotated" => Provenance::Annotated,
            "synset" => Provenance::Synset,
            "hypernym" => Provenance::Hypernym,
            "lexname" => Provenance::Lexname,
            "gloss" => Provenance::Gloss,
            "concat" => Provenance::Concat,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry {
    pub vector: Embedding,
    pub provenance: Provenance,
    pub support: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenseEmbeddingStore {
    dim: usize,
    entries: BTreeMap<SenseKey, StoreEntry>,
}

impl SenseEmbeddingStore {
    pub fn new(dim: usize) -> Self {
        SenseEmbeddingStore {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or replaces an entry, returning the previous one.
    pub fn insert(
        &mut self,
        key: SenseKey,
        entry: StoreEntry,
    ) -> Result<Option<StoreEntry>, StoreError> {
        if entry.vector.dim() != self.dim {
            return Err(StoreError::DimensionMismatch {
                key,
                expected: self.dim,
                found: entry.vector.dim(),
            });
        }
        if entry.provenance == Provenance::Annotated && entry.support == 0 {
            return Err(StoreError::ZeroSupport(key));
        }
        Ok(self.entries.insert(key, entry))
    }

    pub fn get(&self, key: &SenseKey) -> Option<&StoreEntry> {
        self.entries.get(key)
    }

    pub fn vector(&self, key: &SenseKey) -> Option<&Embedding> {
        self.entries.get(key).map(|e| &e.vector)
    }

    pub fn contains(&self, key: &SenseKey) -> bool {
        self.entries.contains_key(key)
    }

    /// Entries in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&SenseKey, &StoreEntry)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &SenseKey> {
        self.entries.keys()
    }

    pub fn count_by_provenance(&self, provenance: Provenance) -> usize {
        self.entries
            .values()
            .filter(|e| e.provenance == provenance)
            .count()
    }

    /// Keeps only the entries accepted by `f`.
    pub fn retain(&mut self, mut f: impl FnMut(&SenseKey, &StoreEntry) -> bool) {
        self.entries.retain(|k, e| f(k, e));
    }
}

/// Writes a store in the text format, lexicographic by key.
pub fn save_store<W: Write>(store: &SenseEmbeddingStore, writer: W) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    writeln!(w, "{} {}", store.len(), store.dim())?;
    for (key, entry) in store.iter() {
        write!(w, "{} {} {}", key, entry.provenance, entry.support)?;
        for v in entry.vector.as_slice() {
            write!(w, " {v:.8e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn load_store<R: BufRead>(reader: R) -> Result<SenseEmbeddingStore, StoreError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(StoreError::MalformedHeader)??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(StoreError::MalformedHeader),
        },
        _ => return Err(StoreError::MalformedHeader),
    };

    let mut store = SenseEmbeddingStore::new(dim);
    let mut found = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        found += 1;
        let mut fields = line.split(' ');
        let key = fields.next().ok_or(StoreError::MalformedLine(line_no))?;
        let key = SenseKey::parse(key).map_err(|_| StoreError::BadSenseKey(line_no))?;
        let provenance = fields
            .next()
            .and_then(|p| p.parse::<Provenance>().ok())
            .ok_or(StoreError::MalformedLine(line_no))?;
        let support = fields
            .next()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or(StoreError::MalformedLine(line_no))?;
        let values = fields
            .map(|v| v.parse::<f32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| StoreError::MalformedLine(line_no))?;
        if values.len() != dim {
            return Err(StoreError::DimensionMismatch {
                key,
                expected: dim,
                found: values.len(),
            });
        }
        let vector = Embedding::new(values).map_err(|_| StoreError::MalformedLine(line_no))?;
        if store.contains(&key) {
            return Err(StoreError::DuplicateKey(key));
        }
        store.insert(
            key,
            StoreEntry {
                vector,
                provenance,
                support,
            },
        )?;
    }
    if found != count {
        return Err(StoreError::CountMismatch {
            expected: count,
            found,
        });
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(s: &str) -> SenseKey {
        SenseKey::parse(s).unwrap()
    }

    fn entry(v: &[f32], provenance: Provenance, support: u32) -> StoreEntry {
        StoreEntry {
            vector: Embedding::new(v.to_vec()).unwrap(),
            provenance,
            support,
        }
    }

    fn saved(store: &SenseEmbeddingStore) -> Vec<u8> {
        let mut buf = Vec::new();
        save_store(store, &mut buf).unwrap();
        buf
    }

    #[test]
    fn text_layout() {
        let mut s = SenseEmbeddingStore::new(2);
        s.insert(key("b%1:04:00::"), entry(&[0.5, -1.0], Provenance::Synset, 0))
            .unwrap();
        s.insert(key("a%1:04:00::"), entry(&[1.0, 0.25], Provenance::Annotated, 3))
            .unwrap();
        let text = String::from_utf8(saved(&s)).unwrap();
        assert_eq!(
            text,
            "2 2\n\
             a%1:04:00:: annotated 3 1.00000000e0 2.50000000e-1\n\
             b%1:04:00:: synset 0 5.00000000e-1 -1.00000000e0\n"
        );
        assert_eq!(load_store(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn insert_validates() {
        let mut s = SenseEmbeddingStore::new(2);
        assert!(matches!(
            s.insert(key("a%1:04:00::"), entry(&[1.0], Provenance::Gloss, 1)),
            Err(StoreError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.insert(key("a%1:04:00::"), entry(&[1.0, 0.0], Provenance::Annotated, 0)),
            Err(StoreError::ZeroSupport(_))
        ));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_store("2 4\na%1:04:00:: annotated 1 1 2 3 4\n".as_bytes()),
            Err(StoreError::CountMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(load_store("".as_bytes()), Err(StoreError::MalformedHeader)));
        assert!(matches!(load_store("x 4\n".as_bytes()), Err(StoreError::MalformedHeader)));
        assert!(matches!(load_store("1 2 3\n".as_bytes()), Err(StoreError::MalformedHeader)));
        assert!(matches!(
            load_store("1 2\na%1:04:00:: annotated 1 1\n".as_bytes()),
            Err(StoreError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            load_store("1 1\na%1:04:00:: bogus 1 1\n".as_bytes()),
            Err(StoreError::MalformedLine(2))
        ));
        assert!(matches!(
            load_store("1 1\nnokey annotated 1 1\n".as_bytes()),
            Err(StoreError::BadSenseKey(2))
        ));
        assert!(matches!(
            load_store("2 1\na%1:04:00:: gloss 1 1\na%1:04:00:: gloss 1 1\n".as_bytes()),
            Err(StoreError::DuplicateKey(_))
        ));
    }

    proptest! {
        #[test]
        fn save_load_is_byte_stable(
            rows in prop::collection::btree_map(
                "[a-z]{1,6}",
                (prop::collection::vec(-1e6f32..1e6, 3), 0usize..6, 1u32..100),
                0..30,
            )
        ) {
            let provs = [
                Provenance::Annotated, Provenance::Synset, Provenance::Hypernym,
                Provenance::Lexname, Provenance::Gloss, Provenance::Concat,
            ];
            let mut s = SenseEmbeddingStore::new(3);
            for (lemma, (v, p, n)) in rows {
                s.insert(key(&format!("{lemma}%1:04:00::")), entry(&v, provs[p], n)).unwrap();
            }
            let first = saved(&s);
            let loaded = load_store(first.as_slice()).unwrap();
            prop_assert_eq!(&loaded, &s);
            prop_assert_eq!(saved(&loaded), first);
        }
    }
}
