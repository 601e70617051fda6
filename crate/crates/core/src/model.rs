//! Versioned JSON model documents.
//!
//! ```json
//! { "format": "acdc-model/1", "kind": "chain", "model": { ... } }
//! ```
//!
//! Field order follows the struct declarations, so identical models
//! serialize to identical bytes.

use serde::{Deserialize, Serialize};

use crate::chain::DecisionChain;
use crate::error::{AcdcError, Result};
use crate::tree::AlphaTree;

pub const MODEL_FORMAT: &str = "acdc-model/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Chain,
    Tree,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Chain(DecisionChain),
    Tree(AlphaTree),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Chain(_) => ModelKind::Chain,
            Model::Tree(_) => ModelKind::Tree,
        }
    }
}

impl From<DecisionChain> for Model {
    fn from(c: DecisionChain) -> Self {
        Model::Chain(c)
    }
}

impl From<AlphaTree> for Model {
    fn from(t: AlphaTree) -> Self {
        Model::Tree(t)
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum BodyRef<'a> {
    Chain(&'a DecisionChain),
    Tree(&'a AlphaTree),
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    format: &'a str,
    kind: ModelKind,
    model: BodyRef<'a>,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
}

#[derive(Deserialize)]
struct DocumentIn {
    kind: ModelKind,
    model: serde_json::Value,
}

pub fn serialize(model: &Model) -> Result<Vec<u8>> {
    let doc = DocumentOut {
        format: MODEL_FORMAT,
        kind: model.kind(),
        model: match model {
            Model::Chain(c) => BodyRef::Chain(c),
            Model::Tree(t) => BodyRef::Tree(t),
        },
    };
    let mut out =
        serde_json::to_vec_pretty(&doc).map_err(|e| AcdcError::MalformedModel(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn deserialize(bytes: &[u8]) -> Result<Model> {
    let malformed = |e: serde_json::Error| AcdcError::MalformedModel(e.to_string());
    let header: Header = serde_json::from_slice(bytes).map_err(malformed)?;
    match header.format.as_deref() {
        Some(MODEL_FORMAT) => {}
        Some(other) => {
            return Err(AcdcError::ModelVersion {
                found: other.to_string(),
                expected: MODEL_FORMAT.to_string(),
            })
        }
        None => return Err(AcdcError::MalformedModel("missing 'format' field".into())),
    }
    let doc: DocumentIn = serde_json::from_slice(bytes).map_err(malformed)?;
    let model = match doc.kind {
        ModelKind::Chain => {
            let chain: DecisionChain = serde_json::from_value(doc.model).map_err(malformed)?;
            chain.validate()?;
            Model::Chain(chain)
        }
        ModelKind::Tree => Model::Tree(serde_json::from_value(doc.model).map_err(malformed)?),
    };
    Ok(model)
}
