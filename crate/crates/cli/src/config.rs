use std::path::{Path, PathBuf};

use serde::Deserialize;
use wsdkit::wic::{FeatureConfig, FeatureSet, Sim2Space, Sim34Variant, TrainConfig};
use wsdkit::wsd::{Fallback, MatchMode, TargetSelector};

use crate::error::CliError;

/// Which sense store a downstream stage reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StoreChoice {
    Annotated,
    Propagated,
    #[default]
    Concat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    /// Same meaning iff both targets receive the same sense (no training).
    SenseMatch,
    #[default]
    Logreg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorePaths {
    pub annotated: Option<PathBuf>,
    pub propagated: Option<PathBuf>,
    pub concat: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WsdSection {
    pub match_mode: MatchMode,
    pub fallback: Fallback,
    pub threads: usize,
    pub store: StoreChoice,
    pub targets: TargetSelector,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub top_k: Option<usize>,
}

impl Default for WsdSection {
    fn default() -> Self {
        WsdSection {
            match_mode: MatchMode::default(),
            fallback: Fallback::default(),
            threads: 1,
            store: StoreChoice::default(),
            targets: TargetSelector::default(),
            input: None,
            output: None,
            top_k: None,
        }
    }
}

/// Files belonging to one WiC split.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WicSplit {
    pub data: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WicSection {
    pub classifier: Classifier,
    pub feature_set: Vec<usize>,
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub sim34_variant: Sim34Variant,
    pub sim2_space: Sim2Space,
    pub store: StoreChoice,
    pub model: Option<PathBuf>,
    pub train: WicSplit,
    pub dev: WicSplit,
    pub test: WicSplit,
}

impl Default for WicSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        WicSection {
            classifier: Classifier::default(),
            feature_set: vec![1, 2],
            lambda: t.lambda,
            tol: t.tol,
            max_iter: t.max_iter,
            sim34_variant: Sim34Variant::default(),
            sim2_space: Sim2Space::default(),
            store: StoreChoice::default(),
            model: None,
            train: WicSplit::default(),
            dev: WicSplit::default(),
            test: WicSplit::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub wordnet_dir: Option<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub gloss_plan_path: Option<PathBuf>,
    pub gloss_embeddings_path: Option<PathBuf>,
    pub stores: StorePaths,
    pub wsd: WsdSection,
    pub wic: WicSection,
}

/// Command-line values that replace configured ones.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// WordNet 3.0 `dict/` directory.
    #[arg(long, global = true)]
    pub wordnet_dir: Option<PathBuf>,
    /// Annotated corpus JSONL.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// `lemma_pos` or `lemma_only`.
    #[arg(long, global = true, value_parser = parse_match_mode)]
    pub match_mode: Option<MatchMode>,
    /// `first_sense` or `error`.
    #[arg(long, global = true, value_parser = parse_fallback)]
    pub fallback: Option<Fallback>,
    /// Worker threads for batch disambiguation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub classifier: Option<Classifier>,
    /// Similarity features for logistic regression, e.g. `1,2`.
    #[arg(long = "features", global = true)]
    pub feature_set: Option<FeatureSet>,
    /// L2 penalty strength.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Gradient tolerance for training.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration cap for training.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// `within` or `cross` pairing for sim3/sim4.
    #[arg(long, global = true, value_parser = parse_sim34)]
    pub sim34: Option<Sim34Variant>,
    /// `native` or `plain` space for sim2.
    #[arg(long, global = true, value_parser = parse_sim2)]
    pub sim2_space: Option<Sim2Space>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_match_mode(s: &str) -> Result<MatchMode, String> {
    parse_enum(s)
}

fn parse_fallback(s: &str) -> Result<Fallback, String> {
    parse_enum(s)
}

fn parse_sim34(s: &str) -> Result<Sim34Variant, String> {
    parse_enum(s)
}

fn parse_sim2(s: &str) -> Result<Sim2Space, String> {
    parse_enum(s)
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = PipelineConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        rebase(base, &mut self.wordnet_dir);
        rebase(base, &mut self.corpus_path);
        rebase(base, &mut self.gloss_plan_path);
        rebase(base, &mut self.gloss_embeddings_path);
        rebase(base, &mut self.stores.annotated);
        rebase(base, &mut self.stores.propagated);
        rebase(base, &mut self.stores.concat);
        rebase(base, &mut self.wsd.input);
        rebase(base, &mut self.wsd.output);
        rebase(base, &mut self.wic.model);
        for split in [&mut self.wic.train, &mut self.wic.dev, &mut self.wic.test] {
            rebase(base, &mut split.data);
            rebase(base, &mut split.gold);
            rebase(base, &mut split.embeddings);
            rebase(base, &mut split.features);
            rebase(base, &mut split.predictions);
            rebase(base, &mut split.report);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.wordnet_dir {
            self.wordnet_dir = Some(v.clone());
        }
        if let Some(v) = &o.corpus {
            self.corpus_path = Some(v.clone());
        }
        if let Some(v) = o.match_mode {
            self.wsd.match_mode = v;
        }
        if let Some(v) = o.fallback {
            self.wsd.fallback = v;
        }
        if let Some(v) = o.threads {
            self.wsd.threads = v;
        }
        if let Some(v) = o.classifier {
            self.wic.classifier = v;
        }
        if let Some(v) = &o.feature_set {
            self.wic.feature_set = v.indices().to_vec();
        }
        if let Some(v) = o.lambda {
            self.wic.lambda = v;
        }
        if let Some(v) = o.tol {
            self.wic.tol = v;
        }
        if let Some(v) = o.max_iter {
            self.wic.max_iter = v;
        }
        if let Some(v) = o.sim34 {
            self.wic.sim34_variant = v;
        }
        if let Some(v) = o.sim2_space {
            self.wic.sim2_space = v;
        }
    }

    pub fn split(&self, split: Split) -> &WicSplit {
        match split {
            Split::Train => &self.wic.train,
            Split::Dev => &self.wic.dev,
            Split::Test => &self.wic.test,
        }
    }

    pub fn store_path(&self, choice: StoreChoice) -> Option<&PathBuf> {
        match choice {
            StoreChoice::Annotated => self.stores.annotated.as_ref(),
            StoreChoice::Propagated => self.stores.propagated.as_ref(),
            StoreChoice::Concat => self.stores.concat.as_ref(),
        }
    }

    pub fn feature_set(&self) -> Result<FeatureSet, CliError> {
        FeatureSet::new(self.wic.feature_set.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lambda: self.wic.lambda,
            tol: self.wic.tol,
            max_iter: self.wic.max_iter,
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            sim34: self.wic.sim34_variant,
            sim2_space: self.wic.sim2_space,
        }
    }
}

/// The path configured under `field`, or a config error naming it.
pub fn required<'a>(field: &str, p: Option<&'a PathBuf>) -> Result<&'a Path, CliError> {
    p.map(PathBuf::as_path)
        .ok_or_else(|| CliError::Config(format!("{field} is not set")))
}

/// Like [`required`], and the path must exist.
pub fn existing<'a>(field: &str, p: Option<&'a PathBuf>) -> Result<&'a Path, CliError> {
    let path = required(field, p)?;
    if !path.exists() {
        return Err(CliError::MissingInput {
            field: field.to_string(),
            path: path.to_path_buf(),
        });
    }
    Ok(path)
}
