//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("negative value {value} for binned attribute {attr}")]
    NegativeBinValue { attr: String, value: f64 },
    #[error("attribute {0} is not binned-continuous")]
    NotBinned(String),
    #[error("instance id mismatch: {0} vs {1}")]
    InstanceMismatch(String, String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("unknown token {token:?} for attribute {attr}")]
    UnknownToken { attr: String, token: String },
    #[error("unknown object type {0}")]
    UnknownObjectType(String),
    #[error("invalid schema or catalog data: {0}")]
    BadData(String),
}

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("unknown action type {0}")]
    UnknownAction(String),
    #[error("action {action} expects {expected} argument(s), got {got}")]
    BadArity {
        action: String,
        expected: u8,
        got: u8,
    },
    #[error("action references missing object {0}")]
    DanglingObject(String),
    #[error("invalid rule table: {0}")]
    BadRuleTable(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("generator {kind} is not applicable: {reason}")]
    GeneratorInapplicable { kind: String, reason: String },
    #[error("unknown generator kind {0}")]
    UnknownGenerator(String),
    #[error("dataset build failed: {0}")]
    Dataset(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed record near {at:?}: {reason}")]
    Structure { at: String, reason: String },
    #[error("record contains no object blocks")]
    Empty,
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: String, detail: String },
    #[error("empty batch")]
    EmptyBatch,
    #[error("training diverged at step {step}: loss is not finite")]
    Diverged { step: usize },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    World(#[from] WorldError),
}
