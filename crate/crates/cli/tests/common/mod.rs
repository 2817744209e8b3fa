#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use tempfile::TempDir;
use wsdkit::corpus::{write_sentence, AnnotatedSentence, AnnotatedToken};
use wsdkit::gloss::read_plans;
use wsdkit::inventory::{build_inventory, SenseInventory, SenseKey, SynsetId};
use wsdkit::vectorspace::Embedding;

pub const DIM: usize = 16;
pub const NOISE: f64 = 0.05;

/// Senses carrying corpus annotations. Every other fixture sense is reached
/// by propagation.
pub const ANNOTATED: [&str; 10] = [
    "entity%1:03:00::",
    "bank%1:17:01::",
    "bank%1:14:00::",
    "cook%2:36:00::",
    "produce%2:36:00::",
    "make%2:36:00::",
    "large%3:00:00::",
    "heavy%5:00:00:large:00",
    "well%4:02:00::",
    "cake%1:13:00::",
];

pub const WIC_LEMMAS: [(&str, &str, &[&str]); 3] = [
    ("bank", "N", &["bank%1:17:01::", "bank%1:14:00::"]),
    ("make", "V", &["make%2:36:00::", "make%2:36:01::", "make%2:36:02::"]),
    ("big", "A", &["big%3:00:01::", "big%5:00:00:large:00"]),
];

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/wordnet12")
}

pub fn fixture() -> SenseInventory {
    build_inventory(&fixture_dir()).expect("fixture inventory")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng, dim: usize, sigma: f64) -> Vec<f32> {
    let n = Normal::new(0.0, sigma).unwrap();
    (0..dim).map(|_| n.sample(r) as f32).collect()
}

pub fn key(s: &str) -> SenseKey {
    s.parse().unwrap()
}

/// Runs the CLI and returns its exit status, stdout JSON and stderr.
pub fn wsdkit(args: &[&str]) -> (bool, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wsdkit"))
        .args(args)
        .output()
        .expect("spawn wsdkit");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    let json = serde_json::from_str(stdout.trim()).unwrap_or(Value::Null);
    (out.status.success(), json, stderr)
}

/// Like [`wsdkit`] but fails on a nonzero exit.
pub fn wsdkit_ok(args: &[&str]) -> Result<Value, String> {
    let (ok, json, stderr) = wsdkit(args);
    if ok {
        Ok(json)
    } else {
        Err(format!("wsdkit {} failed: {}", args.join(" "), stderr.trim()))
    }
}

/// A synthetic language model over the fixture WordNet: every synset has a
/// random centre, and a token used in some sense is that synset's centre
/// plus isotropic Gaussian noise.
pub struct World {
    pub dir: TempDir,
    pub inv: SenseInventory,
    centres: BTreeMap<SynsetId, Vec<f32>>,
    rng: ChaCha8Rng,
}

impl World {
    pub fn new(seed: u64) -> World {
        let inv = fixture();
        let mut r = rng(seed);
        let centres = inv
            .synsets()
            .map(|s| (s.id, gaussian(&mut r, DIM, 1.0 / (DIM as f64).sqrt())))
            .collect();
        World {
            dir: tempfile::tempdir().unwrap(),
            inv,
            centres,
            rng: r,
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn sense_vector(&mut self, k: &SenseKey) -> Vec<f32> {
        let id = self.inv.synset_of(k).unwrap().id;
        let c = self.centres[&id].clone();
        let noise = gaussian(&mut self.rng, DIM, NOISE);
        c.iter().zip(noise).map(|(a, b)| a + b).collect()
    }

    fn filler(&mut self) -> Vec<f32> {
        gaussian(&mut self.rng, DIM, 1.0 / (DIM as f64).sqrt())
    }

    fn tok(text: &str, lemma: &str, k: Option<&SenseKey>, v: Vec<f32>) -> AnnotatedToken {
        AnnotatedToken {
            text: text.to_string(),
            lemma: lemma.to_string(),
            pos: k.map(|k| k.pos()),
            sense_key: k.cloned(),
            vector: Embedding::new(v).unwrap(),
        }
    }

    /// `sentences` sentences, each with two annotated tokens among fillers.
    pub fn write_corpus(&mut self, rel: &str, sentences: usize) {
        let mut w = BufWriter::new(File::create(self.path(rel)).unwrap());
        for i in 0..sentences {
            let mut tokens = Vec::new();
            for j in 0..5 {
                if j == 1 || j == 3 {
                    let k = key(ANNOTATED[(2 * i + j / 2) % ANNOTATED.len()]);
                    let v = self.sense_vector(&k);
                    tokens.push(Self::tok(k.lemma(), k.lemma(), Some(&k), v));
                } else {
                    let v = self.filler();
                    tokens.push(Self::tok(&format!("w{j}"), &format!("w{j}"), None, v));
                }
            }
            let s = AnnotatedSentence {
                sentence_id: format!("c{i}"),
                tokens,
            };
            write_sentence(&mut w, &s).unwrap();
        }
        w.flush().unwrap();
    }

    /// Gloss token vectors for a plan file written by `gloss-plan`: every
    /// token of a sense's gloss sits near that sense's synset centre.
    pub fn write_gloss_embeddings(&mut self, plan_rel: &str, out_rel: &str) -> usize {
        let plans = read_plans(BufReader::new(File::open(self.path(plan_rel)).unwrap())).unwrap();
        let mut w = BufWriter::new(File::create(self.path(out_rel)).unwrap());
        for p in &plans {
            let tokens = p
                .tokens
                .iter()
                .map(|t| {
                    let v = self.sense_vector(&p.sense_key);
                    Self::tok(t, t, None, v)
                })
                .collect();
            let s = AnnotatedSentence {
                sentence_id: p.sense_key.to_string(),
                tokens,
            };
            write_sentence(&mut w, &s).unwrap();
        }
        w.flush().unwrap();
        plans.len()
    }

    /// A WiC split of `pairs` instances over bank, make and big, half of
    /// them sharing a sense.
    pub fn write_wic(&mut self, name: &str, pairs: usize) {
        let mut data = String::new();
        let mut gold = String::new();
        let mut emb = BufWriter::new(File::create(self.path(&format!("{name}.emb.jsonl"))).unwrap());
        for i in 0..pairs {
            let (lemma, pos, senses) = WIC_LEMMAS[i % WIC_LEMMAS.len()];
            let same = (i / WIC_LEMMAS.len()).is_multiple_of(2);
            let a = self.rng.random_range(0..senses.len());
            let b = if same {
                a
            } else {
                (a + self.rng.random_range(1..senses.len())) % senses.len()
            };
            let mut texts = Vec::new();
            let mut idxs = Vec::new();
            for (part, sense) in [("s1", senses[a]), ("s2", senses[b])] {
                let len = self.rng.random_range(4..9);
                let target = self.rng.random_range(0..len);
                let k = key(sense);
                let mut words = Vec::new();
                let mut tokens = Vec::new();
                for j in 0..len {
                    if j == target {
                        words.push(lemma.to_string());
                        let v = self.sense_vector(&k);
                        tokens.push(Self::tok(lemma, lemma, None, v));
                    } else {
                        let w = format!("x{j}");
                        let v = self.filler();
                        tokens.push(Self::tok(&w, &w, None, v));
                        words.push(w);
                    }
                }
                let s = AnnotatedSentence {
                    sentence_id: format!("{i}.{part}"),
                    tokens,
                };
                write_sentence(&mut emb, &s).unwrap();
                texts.push(words.join(" "));
                idxs.push(target);
            }
            data.push_str(&format!(
                "{lemma}\t{pos}\t{}-{}\t{}\t{}\n",
                idxs[0], idxs[1], texts[0], texts[1]
            ));
            gold.push_str(if same { "T\n" } else { "F\n" });
        }
        emb.flush().unwrap();
        fs::write(self.path(&format!("{name}.tsv")), data).unwrap();
        fs::write(self.path(&format!("{name}.gold.txt")), gold).unwrap();
    }

    /// Writes `<tag>.toml` with the given `[wic]` body and returns its path.
    pub fn write_config(&self, tag: &str, wic: &str) -> PathBuf {
        let text = format!(
            r#"wordnet_dir = "{wn}"
corpus_path = "corpus.jsonl"
gloss_plan_path = "gloss_plan.jsonl"
gloss_embeddings_path = "gloss_emb.jsonl"

[stores]
annotated = "stores/annotated.txt"
propagated = "stores/propagated.txt"
concat = "stores/concat.txt"

[wsd]
input = "corpus.jsonl"
output = "wsd_out.jsonl"
threads = 2

[wic]
{wic}
model = "{tag}/model.json"

[wic.train]
data = "train.tsv"
gold = "train.gold.txt"
embeddings = "train.emb.jsonl"
features = "features/train.jsonl"

[wic.dev]
data = "dev.tsv"
gold = "dev.gold.txt"
embeddings = "dev.emb.jsonl"
features = "features/dev.jsonl"
predictions = "{tag}/dev_pred.tsv"
report = "{tag}/dev_report.json"
"#,
            wn = fixture_dir().display()
        );
        let p = self.path(&format!("{tag}.toml"));
        fs::write(&p, text).unwrap();
        p
    }
}
