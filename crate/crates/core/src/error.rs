//! Crate-wide error type.

use crate::transform::TransformName;

/// Errors produced by parsing, extraction, inference, and training.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A tree or edit-script document is not well formed.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A node label is not part of the label alphabet.
    #[error("unknown label `{found}`; expected one of: {alphabet}")]
    UnknownLabel { found: String, alphabet: String },

    /// A transform name is not part of the transform alphabet.
    #[error("unknown transform `{0}`")]
    UnknownTransform(String),

    /// An edit operation references a node that does not exist.
    #[error("op #{op_index}: dangling node reference `{reference}`")]
    DanglingRef { op_index: usize, reference: String },

    /// An edit operation cannot be applied to the current tree.
    #[error("op #{op_index}: {message}")]
    InvalidOp { op_index: usize, message: String },

    /// Two extraction rules claimed the same node with different transforms.
    #[error("extraction conflict at position {position}: {first} vs {second}")]
    ExtractionConflict {
        position: u32,
        first: TransformName,
        second: TransformName,
    },

    /// No admissible assignment exists for an inference instance.
    #[error("inference error: {0}")]
    Inference(String),

    /// Exhaustive enumeration would exceed the instance-size guard.
    #[error("instance too large for brute force: {assignments:.3e} assignments > {limit:.3e}")]
    BruteForceTooLarge { assignments: f64, limit: f64 },

    /// A training example or configuration is invalid.
    #[error("training error: {0}")]
    Training(String),

    /// An underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// An underlying JSON failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
