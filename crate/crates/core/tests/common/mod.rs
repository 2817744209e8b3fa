#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wsdkit::corpus::{AnnotatedSentence, AnnotatedToken};
use wsdkit::inventory::{build_inventory, Pos, SenseInventory, SenseKey};
use wsdkit::store::{Provenance, SenseEmbeddingStore, StoreEntry};
use wsdkit::vectorspace::Embedding;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/wordnet12")
}

pub fn fixture() -> SenseInventory {
    build_inventory(&fixture_dir()).expect("fixture inventory")
}

pub fn key(s: &str) -> SenseKey {
    s.parse().unwrap()
}

pub fn emb(v: &[f32]) -> Embedding {
    Embedding::new(v.to_vec()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize, sigma: f64) -> Vec<f32> {
    let n = Normal::new(0.0, sigma).unwrap();
    (0..dim).map(|_| n.sample(rng) as f32).collect()
}

pub fn token(lemma: &str, pos: Option<Pos>, sense: Option<&str>, v: Vec<f32>) -> AnnotatedToken {
    AnnotatedToken {
        text: lemma.to_string(),
        lemma: lemma.to_string(),
        pos,
        sense_key: sense.map(key),
        vector: Embedding::new(v).unwrap(),
    }
}

pub fn sentence(id: &str, tokens: Vec<AnnotatedToken>) -> AnnotatedSentence {
    AnnotatedSentence {
        sentence_id: id.to_string(),
        tokens,
    }
}

pub fn store_of(rows: &[(&str, Vec<f32>, Provenance)]) -> SenseEmbeddingStore {
    let mut s = SenseEmbeddingStore::new(rows[0].1.len());
    for (k, v, p) in rows {
        let support = if *p == Provenance::Annotated { 1 } else { 0 };
        s.insert(
            key(k),
            StoreEntry {
                vector: Embedding::new(v.clone()).unwrap(),
                provenance: *p,
                support,
            },
        )
        .unwrap();
    }
    s
}
