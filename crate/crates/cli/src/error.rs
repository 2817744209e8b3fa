use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;
use wsdkit::corpus::CorpusError;
use wsdkit::gloss::GlossError;
use wsdkit::inventory::InventoryError;
use wsdkit::propagation::PropagationError;
use wsdkit::store::StoreError;
use wsdkit::wic::WicError;
use wsdkit::wsd::WsdError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{field} points at {path}, which does not exist")]
    MissingInput { field: String, path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Inventory(#[from] InventoryError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Gloss(#[from] GlossError),
    #[error(transparent)]
    Wsd(#[from] WsdError),
    #[error(transparent)]
    Wic(#[from] WicError),
}

/// The variant name from a derived `Debug` rendering.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or_default()
        .to_string()
}

impl CliError {
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::MissingInput { .. } | CliError::Io { .. } => "cli",
            CliError::Inventory(_) => "inventory",
            CliError::Store(_) => "store",
            CliError::Corpus(_) => "corpus",
            CliError::Propagation(_) => "propagation",
            CliError::Gloss(_) => "gloss",
            CliError::Wsd(_) => "wsd",
            CliError::Wic(_) => "wic",
        }
    }

    pub fn kind(&self) -> String {
        match self {
            CliError::Config(_) => "Config".into(),
            CliError::MissingInput { .. } => "MissingInput".into(),
            CliError::Io { .. } => "Io".into(),
            CliError::Inventory(e) => variant(e),
            CliError::Store(e) => variant(e),
            CliError::Corpus(e) => variant(e),
            CliError::Propagation(e) => variant(e),
            CliError::Gloss(e) => variant(e),
            CliError::Wsd(e) => variant(e),
            CliError::Wic(e) => variant(e),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "module": self.module(),
                "kind": self.kind(),
                "message": self.to_string(),
            }
        })
    }
}
