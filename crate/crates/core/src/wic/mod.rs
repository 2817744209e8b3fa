//! Word-in-Context decisions on top of the disambiguator.
//!
//! Two classifiers are provided: comparing the senses chosen for the
//! target in each sentence, and a logistic regression over cosine
//! similarities between contextual and sense vectors.

mod dataset;
mod eval;
mod features;
mod logreg;

use thiserror::Error;

pub use dataset::{
    load_wic_dataset, parse_gold, parse_wic_rows, read_predictions, write_predictions, WicInstance,
    WicRow,
};
pub use eval::{evaluate, Confusion, EvalReport, ProbHistogram, HISTOGRAM_BINS};
pub use features::{
    classify_by_sense_match, compute_similarities, read_features, write_features, FeatureConfig,
    FeatureRecord, Sim2Space, Sim34Variant, SimilarityFeatures,
};
pub use logreg::{
    objective, predict, sigmoid, train_logreg, train_matrix, FeatureSet, LogRegModel, TrainConfig,
    TrainingMeta,
};

use crate::corpus::CorpusError;
use crate::vectorspace::VectorError;
use crate::wsd::WsdError;

#[derive(Debug, Error)]
pub enum WicError {
    #[error("line {0}: malformed WiC row")]
    MalformedRow(usize),
    #[error("line {0}: gold labels must be T or F")]
    MalformedGold(usize),
    #[error("{rows} data rows but {gold} gold labels")]
    GoldCountMismatch { rows: usize, gold: usize },
    #[error("no embeddings for {0}")]
    MissingEmbedding(String),
    #[error("{key}: {found} vectors for a {expected}-token sentence")]
    TokenCountMismatch {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("instance {0}: target index out of range")]
    IndexOutOfRange(String),
    #[error("feature sim{0} is required but absent")]
    MissingFeature(usize),
    #[error("invalid feature set {0:?}")]
    BadFeatureSet(String),
    #[error("model has {weights} weights for {features} features")]
    BadModel { weights: usize, features: usize },
    #[error("training needs both classes")]
    DegenerateLabels,
    #[error("need at least two training examples")]
    TooFewExamples,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("training diverged")]
    NonFinite,
    #[error("line {0}: malformed feature record")]
    MalformedFeatures(usize),
    #[error("line {0}: malformed prediction")]
    MalformedPrediction(usize),
    #[error(transparent)]
    Wsd(#[from] WsdError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
