mod common;

use std::collections::BTreeMap;

use common::{fixture, gaussian, key, rng, store_of};
use rand::Rng;
use wsdkit::inventory::{SenseInventory, SenseKey, SynsetId};
use wsdkit::propagation::{propagate_full_coverage, CoverageReport, PropagationError};
use wsdkit::store::{Provenance, SenseEmbeddingStore, StoreEntry};
use wsdkit::vectorspace::Embedding;

const A: Provenance = Provenance::Annotated;

fn hand_store() -> SenseEmbeddingStore {
    store_of(&[
        ("entity%1:03:00::", vec![1.0, 0.0], A),
        ("cake%1:13:00::", vec![0.0, 1.0], A),
        ("bank%1:17:01::", vec![2.0, 2.0], A),
        ("bank%1:14:00::", vec![4.0, 0.0], A),
        ("cook%2:36:00::", vec![1.0, 3.0], A),
        ("make%2:36:01::", vec![3.0, 1.0], A),
        ("produce%2:36:00::", vec![0.0, 4.0], A),
        ("large%3:00:00::", vec![-1.0, 1.0], A),
        ("well%4:02:00::", vec![5.0, 5.0], A),
    ])
}

#[test]
fn hand_worked_values() {
    let inv = fixture();
    let (out, report) = propagate_full_coverage(&hand_store(), &inv).unwrap();
    assert_eq!(
        report,
        CoverageReport {
            annotated: 9,
            synset: 10,
            hypernym: 5,
            lexname: 4,
            uncovered: 0,
            uncovered_keys: vec![],
        }
    );
    assert_eq!(out.len(), 28);

    let check = |k: &str, v: [f32; 2], p: Provenance| {
        let e = out.get(&key(k)).unwrap_or_else(|| panic!("{k} missing"));
        assert_eq!(e.vector.as_slice(), &v, "{k}");
        assert_eq!(e.provenance, p, "{k}");
    };
    // synset stage
    for k in [
        "depository_financial_institution%1:14:00::",
        "banking_concern%1:14:00::",
        "banking_company%1:14:00::",
    ] {
        check(k, [4.0, 0.0], Provenance::Synset);
    }
    for k in ["fix%2:36:00::", "ready%2:36:00::", "prepare%2:36:00::"] {
        check(k, [2.0, 2.0], Provenance::Synset);
    }
    check("make%2:36:02::", [0.0, 4.0], Provenance::Synset);
    check("create%2:36:01::", [0.0, 4.0], Provenance::Synset);
    check("big%3:00:01::", [-1.0, 1.0], Provenance::Synset);
    check("good%4:02:00::", [5.0, 5.0], Provenance::Synset);
    // hypernym stage: entity pools itself and cake among its hyponyms
    for k in [
        "slope%1:17:00::",
        "incline%1:17:00::",
        "side%1:17:00::",
        "financial_institution%1:14:00::",
        "financial_organization%1:14:00::",
    ] {
        check(k, [0.5, 0.5], Provenance::Hypernym);
    }
    // lexname stage: verb.creation pools the cook and produce synsets
    check("make%2:36:00::", [1.0, 3.0], Provenance::Lexname);
    check("create%2:36:00::", [1.0, 3.0], Provenance::Lexname);
    check("big%5:00:00:large:00", [-1.0, 1.0], Provenance::Lexname);
    check("heavy%5:00:00:large:00", [-1.0, 1.0], Provenance::Lexname);

    for (_, e) in out.iter() {
        if e.provenance != A {
            assert_eq!(e.support, 0);
        }
    }
}

#[test]
fn idempotent() {
    let inv = fixture();
    let (once, r1) = propagate_full_coverage(&hand_store(), &inv).unwrap();
    let (twice, r2) = propagate_full_coverage(&once, &inv).unwrap();
    assert_eq!(once, twice);
    assert_eq!(r1, r2);
}

#[test]
fn annotated_entries_are_untouched() {
    let inv = fixture();
    let input = hand_store();
    let (out, _) = propagate_full_coverage(&input, &inv).unwrap();
    for (k, e) in input.iter() {
        assert_eq!(out.get(k), Some(e));
    }
}

#[test]
fn gloss_entries_are_rejected() {
    let inv = fixture();
    let s = store_of(&[("cake%1:13:00::", vec![0.0, 1.0], Provenance::Gloss)]);
    assert!(matches!(
        propagate_full_coverage(&s, &inv),
        Err(PropagationError::UnsupportedProvenance(_, Provenance::Gloss))
    ));
}

#[test]
fn uncovered_when_nothing_shares_a_lexfile() {
    let inv = fixture();
    let s = store_of(&[("well%4:02:00::", vec![1.0, 2.0], A)]);
    let (out, report) = propagate_full_coverage(&s, &inv).unwrap();
    assert_eq!(report.annotated, 1);
    assert_eq!(report.synset, 1);
    assert_eq!(report.uncovered, 26);
    assert_eq!(report.total(), 28);
    assert_eq!(out.len(), 2);
    assert!(report.uncovered_keys.contains(&key("bank%1:17:01::")));
}

fn mean64(vs: &[Vec<f64>]) -> Option<Vec<f64>> {
    if vs.is_empty() {
        return None;
    }
    let dim = vs[0].len();
    Some(
        (0..dim)
            .map(|j| vs.iter().map(|v| v[j]).sum::<f64>() / vs.len() as f64)
            .collect(),
    )
}

fn to64(e: &Embedding) -> Vec<f64> {
    e.as_slice().iter().map(|&x| x as f64).collect()
}

/// Straight-line reimplementation of the three-level fill.
fn oracle(store: &SenseEmbeddingStore, inv: &SenseInventory) -> BTreeMap<SenseKey, (Vec<f64>, Provenance)> {
    let synset_emb = |id: SynsetId| -> Option<Vec<f64>> {
        let vs: Vec<Vec<f64>> = inv
            .senses_of_synset(id)
            .iter()
            .filter_map(|k| store.vector(k).map(to64))
            .collect();
        mean64(&vs)
    };
    let hyper_emb = |h: SynsetId| -> Option<Vec<f64>> {
        let mut vs = Vec::new();
        if let Some(v) = synset_emb(h) {
            vs.push(v);
        }
        for s in inv.synsets() {
            if s.hypernyms.contains(&h) && s.id != h {
                if let Some(v) = synset_emb(s.id) {
                    vs.push(v);
                }
            }
        }
        mean64(&vs)
    };
    let lex_emb = |name: &str| -> Option<Vec<f64>> {
        let vs: Vec<Vec<f64>> = inv
            .synsets()
            .filter(|s| s.lexname() == name)
            .filter_map(|s| synset_emb(s.id))
            .collect();
        mean64(&vs)
    };
    let mut out = BTreeMap::new();
    for k in inv.sense_keys() {
        if let Some(v) = store.vector(k) {
            out.insert(k.clone(), (to64(v), A));
            continue;
        }
        let s = inv.synset_of(k).unwrap();
        if let Some(v) = synset_emb(s.id) {
            out.insert(k.clone(), (v, Provenance::Synset));
            continue;
        }
        let mut hs = s.hypernyms.clone();
        hs.sort();
        hs.dedup();
        let hv: Vec<Vec<f64>> = hs.iter().filter_map(|&h| hyper_emb(h)).collect();
        if let Some(v) = mean64(&hv) {
            out.insert(k.clone(), (v, Provenance::Hypernym));
            continue;
        }
        if let Some(v) = lex_emb(s.lexname()) {
            out.insert(k.clone(), (v, Provenance::Lexname));
        }
    }
    out
}

#[test]
fn matches_straight_line_oracle() {
    let inv = fixture();
    let keys: Vec<SenseKey> = inv.sense_keys().cloned().collect();
    let mut r = rng(42);
    for trial in 0..200 {
        let mut store = SenseEmbeddingStore::new(5);
        for k in &keys {
            if r.random_bool(0.3) {
                let v = gaussian(&mut r, 5, 1.0);
                store
                    .insert(
                        k.clone(),
                        StoreEntry {
                            vector: Embedding::new(v).unwrap(),
                            provenance: A,
                            support: 1,
                        },
                    )
                    .unwrap();
            }
        }
        if store.is_empty() {
            continue;
        }
        let (out, report) = propagate_full_coverage(&store, &inv).unwrap();
        let want = oracle(&store, &inv);
        assert_eq!(out.len(), want.len(), "trial {trial}");
        assert_eq!(report.uncovered, keys.len() - want.len());
        for (k, (v, p)) in &want {
            let e = out.get(k).unwrap();
            assert_eq!(e.provenance, *p, "trial {trial} {k}");
            for (a, b) in e.vector.as_slice().iter().zip(v) {
                assert!((*a as f64 - b).abs() < 1e-6, "trial {trial} {k}");
            }
        }
    }
}
