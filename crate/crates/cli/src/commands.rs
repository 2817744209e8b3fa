//! One function per subcommand. Each returns the JSON run summary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use wsdkit::corpus::{bootstrap_sense_embeddings, load_annotated_corpus, AnnotatedSentence};
use wsdkit::gloss::{build_all_plans, build_gloss_store, merge_concat, write_plans};
use wsdkit::inventory::{self, SenseInventory};
use wsdkit::propagation::propagate_full_coverage;
use wsdkit::store::{load_store, save_store, SenseEmbeddingStore};
use wsdkit::wic::{
    classify_by_sense_match, compute_similarities, evaluate, load_wic_dataset, parse_gold,
    predict, read_features, read_predictions, train_logreg, write_features, write_predictions,
    FeatureRecord, LogRegModel, WicError,
};
use wsdkit::wsd::{build_index, disambiguate_batch, write_batch_record};

use crate::config::{existing, required, Classifier, PipelineConfig, Split};
use crate::error::CliError;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    File::create(path).map(BufWriter::new).map_err(io)
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn inventory(cfg: &PipelineConfig) -> Result<SenseInventory, CliError> {
    let dir = required("wordnet_dir", cfg.wordnet_dir.as_ref())?;
    Ok(inventory::build_inventory(dir)?)
}

fn read_store(field: &str, path: Option<&std::path::PathBuf>) -> Result<SenseEmbeddingStore, CliError> {
    let path = existing(field, path)?;
    Ok(load_store(open(path)?)?)
}

fn write_store(path: &Path, store: &SenseEmbeddingStore) -> Result<(), CliError> {
    save_store(store, create(path)?).map_err(write_err(path))
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

pub fn build_inventory(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let mut by_pos: BTreeMap<String, usize> = BTreeMap::new();
    let mut lexnames: BTreeMap<&str, usize> = BTreeMap::new();
    let mut edges = 0;
    for s in inv.synsets() {
        *by_pos.entry(s.id.pos.to_string()).or_default() += 1;
        *lexnames.entry(s.lexname()).or_default() += 1;
        edges += s.hypernyms.len();
    }
    Ok(json!({
        "command": "build-inventory",
        "synsets": inv.synset_count(),
        "senses": inv.sense_count(),
        "synsets_by_pos": by_pos,
        "hypernym_edges": edges,
        "lexnames": lexnames.len(),
        "elapsed_ms": ms(start),
    }))
}

pub fn bootstrap(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let corpus = existing("corpus_path", cfg.corpus_path.as_ref())?;
    let out = required("stores.annotated", cfg.stores.annotated.as_ref())?;
    let (store, summary) = bootstrap_sense_embeddings(load_annotated_corpus(open(corpus)?), Some(&inv))?;
    write_store(out, &store)?;
    Ok(json!({
        "command": "bootstrap",
        "summary": summary,
        "dim": store.dim(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn propagate(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let store = read_store("stores.annotated", cfg.stores.annotated.as_ref())?;
    let out = required("stores.propagated", cfg.stores.propagated.as_ref())?;
    let (full, report) = propagate_full_coverage(&store, &inv)?;
    write_store(out, &full)?;
    Ok(json!({
        "command": "propagate",
        "coverage": report,
        "entries": full.len(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn gloss_plan(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let out = required("gloss_plan_path", cfg.gloss_plan_path.as_ref())?;
    let plans = build_all_plans(&inv);
    write_plans(create(out)?, &plans).map_err(write_err(out))?;
    Ok(json!({
        "command": "gloss-plan",
        "plans": plans.len(),
        "tokens": plans.iter().map(|p| p.tokens.len()).sum::<usize>(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn gloss_merge(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let sense = read_store("stores.propagated", cfg.stores.propagated.as_ref())?;
    let glosses = existing("gloss_embeddings_path", cfg.gloss_embeddings_path.as_ref())?;
    let out = required("stores.concat", cfg.stores.concat.as_ref())?;
    let gloss = build_gloss_store(load_annotated_corpus(open(glosses)?), Some(&inv))?;
    let merged = merge_concat(&sense, &gloss)?;
    write_store(out, &merged)?;
    Ok(json!({
        "command": "gloss-merge",
        "gloss_entries": gloss.len(),
        "entries": merged.len(),
        "dim": merged.dim(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn disambiguate(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let store_field = format!("stores.{}", store_name(cfg.wsd.store));
    let store = read_store(&store_field, cfg.store_path(cfg.wsd.store))?;
    let input = existing("wsd.input", cfg.wsd.input.as_ref())?;
    let out = required("wsd.output", cfg.wsd.output.as_ref())?;
    let idx = build_index(&store, &inv, cfg.wsd.match_mode, cfg.wsd.fallback)?;
    let sentences: Vec<AnnotatedSentence> =
        load_annotated_corpus(open(input)?).collect::<Result<_, _>>()?;
    let records = disambiguate_batch(&idx, &sentences, cfg.wsd.targets, cfg.wsd.threads)?;

    let mut w = create(out)?;
    let (mut errors, mut fallbacks, mut scored, mut correct) = (0, 0, 0, 0);
    for r in &records {
        write_batch_record(&mut w, r, cfg.wsd.top_k).map_err(write_err(out))?;
        match &r.result {
            Ok(d) => {
                fallbacks += usize::from(d.used_fallback);
                if let Some(g) = &r.gold {
                    scored += 1;
                    correct += usize::from(*g == d.chosen);
                }
            }
            Err(_) => errors += 1,
        }
    }
    std::io::Write::flush(&mut w).map_err(write_err(out))?;
    Ok(json!({
        "command": "disambiguate",
        "index": idx.report(),
        "space": idx.space(),
        "targets": records.len(),
        "errors": errors,
        "fallbacks": fallbacks,
        "scored": scored,
        "correct": correct,
        "accuracy": if scored > 0 { Some(correct as f64 / scored as f64) } else { None },
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

fn store_name(c: crate::config::StoreChoice) -> &'static str {
    match c {
        crate::config::StoreChoice::Annotated => "annotated",
        crate::config::StoreChoice::Propagated => "propagated",
        crate::config::StoreChoice::Concat => "concat",
    }
}

fn split_field(split: Split, name: &str) -> String {
    format!("wic.{}.{name}", split.name())
}

pub fn wic_features(cfg: &PipelineConfig, split: Split) -> Result<Value, CliError> {
    let start = Instant::now();
    let inv = inventory(cfg)?;
    let store_field = format!("stores.{}", store_name(cfg.wic.store));
    let store = read_store(&store_field, cfg.store_path(cfg.wic.store))?;
    let s = cfg.split(split);
    let data = existing(&split_field(split, "data"), s.data.as_ref())?;
    let embeddings = existing(&split_field(split, "embeddings"), s.embeddings.as_ref())?;
    let gold = match &s.gold {
        Some(g) => Some(open(existing(&split_field(split, "gold"), Some(g))?)?),
        None => None,
    };
    let out = required(&split_field(split, "features"), s.features.as_ref())?;

    let idx = build_index(&store, &inv, cfg.wsd.match_mode, cfg.wsd.fallback)?;
    let instances = load_wic_dataset(open(data)?, gold, open(embeddings)?)?;
    let fc = cfg.feature_config();
    let mut records = Vec::with_capacity(instances.len());
    for inst in &instances {
        let f = compute_similarities(inst, &idx, &fc)?;
        records.push(FeatureRecord::new(inst.instance_id.clone(), &f, inst.gold));
    }
    write_features(create(out)?, &records).map_err(write_err(out))?;
    let same = records.iter().filter(|r| r.sense1 == r.sense2).count();
    Ok(json!({
        "command": "wic-features",
        "split": split.name(),
        "instances": records.len(),
        "same_sense": same,
        "labelled": records.iter().filter(|r| r.gold.is_some()).count(),
        "space": idx.space(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

fn load_features(cfg: &PipelineConfig, split: Split) -> Result<Vec<FeatureRecord>, CliError> {
    let path = existing(&split_field(split, "features"), cfg.split(split).features.as_ref())?;
    Ok(read_features(open(path)?)?)
}

pub fn wic_train(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let start = Instant::now();
    if cfg.wic.classifier == Classifier::SenseMatch {
        return Ok(json!({
            "command": "wic-train",
            "classifier": "sense_match",
            "trained": false,
            "elapsed_ms": ms(start),
        }));
    }
    let set = cfg.feature_set()?;
    let records = load_features(cfg, Split::Train)?;
    let out = required("wic.model", cfg.wic.model.as_ref())?;
    let labels = records
        .iter()
        .map(|r| {
            r.gold.ok_or_else(|| {
                CliError::Config(format!("training instance {} has no gold label", r.instance_id))
            })
        })
        .collect::<Result<Vec<bool>, _>>()?;
    let feats: Vec<_> = records.iter().map(FeatureRecord::features).collect();
    let model = train_logreg(&feats, &labels, &set, &cfg.train_config())?;
    model.save(create(out)?).map_err(write_err(out))?;
    Ok(json!({
        "command": "wic-train",
        "classifier": "logreg",
        "trained": true,
        "feature_set": model.feature_set,
        "weights": model.weights,
        "bias": model.bias,
        "training_meta": model.training_meta,
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn wic_predict(cfg: &PipelineConfig, split: Split) -> Result<Value, CliError> {
    let start = Instant::now();
    let records = load_features(cfg, split)?;
    let out = required(&split_field(split, "predictions"), cfg.split(split).predictions.as_ref())?;
    let model = match cfg.wic.classifier {
        Classifier::SenseMatch => None,
        Classifier::Logreg => {
            let path = existing("wic.model", cfg.wic.model.as_ref())?;
            Some(LogRegModel::load(open(path)?)?)
        }
    };
    let mut rows = Vec::with_capacity(records.len());
    for r in &records {
        let f = r.features();
        let (p, label) = match &model {
            None => {
                let same = classify_by_sense_match(&f);
                (if same { 1.0 } else { 0.0 }, same)
            }
            Some(m) => predict(m, &f)?,
        };
        rows.push((r.instance_id.clone(), p, label));
    }
    write_predictions(create(out)?, &rows).map_err(write_err(out))?;
    Ok(json!({
        "command": "wic-predict",
        "split": split.name(),
        "classifier": if model.is_some() { "logreg" } else { "sense_match" },
        "predictions": rows.len(),
        "positive": rows.iter().filter(|r| r.2).count(),
        "output": out,
        "elapsed_ms": ms(start),
    }))
}

pub fn wic_eval(cfg: &PipelineConfig, split: Split) -> Result<Value, CliError> {
    let start = Instant::now();
    let s = cfg.split(split);
    let preds_path = existing(&split_field(split, "predictions"), s.predictions.as_ref())?;
    let gold_path = existing(&split_field(split, "gold"), s.gold.as_ref())?;
    let preds = read_predictions(open(preds_path)?)?;
    let gold = parse_gold(open(gold_path)?)?;
    if let Some(pos) = preds.iter().enumerate().position(|(i, p)| p.0 != i.to_string()) {
        return Err(WicError::MalformedPrediction(pos + 1).into());
    }
    let pairs: Vec<(f64, bool)> = preds.iter().map(|p| (p.1, p.2)).collect();
    let report = evaluate(&pairs, &gold)?;
    if let Some(path) = &s.report {
        let w = create(path)?;
        serde_json::to_writer_pretty(w, &report)
            .map_err(|e| write_err(path)(std::io::Error::other(e)))?;
    }
    Ok(json!({
        "command": "wic-eval",
        "split": split.name(),
        "report": report,
        "elapsed_ms": ms(start),
    }))
}
