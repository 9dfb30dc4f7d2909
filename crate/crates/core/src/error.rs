use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to parse design: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid design: {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Structural mismatch between a corner block list and the design it is decoded against.
#[derive(Debug, Error, PartialEq)]
pub enum CblError {
    #[error("sequence has {found} entries, design has {expected} blocks")]
    SequenceLength { expected: usize, found: usize },
    #[error("sequence is not a permutation: block {0} repeated or out of range")]
    NotPermutation(usize),
    #[error("direction list has {found} entries, expected {expected}")]
    DirectionLength { expected: usize, found: usize },
    #[error("selection has {found} entries, design has {expected} blocks")]
    SelectionLength { expected: usize, found: usize },
    #[error("block {block}: candidate index {index} out of range ({available} candidates)")]
    CandidateIndex {
        block: usize,
        index: usize,
        available: usize,
    },
    #[error("unknown block id `{0}`")]
    UnknownBlock(String),
    #[error("malformed corner block list text: {0}")]
    Syntax(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance has {found} blocks, oracle limit is {limit}")]
    TooLarge { found: usize, limit: usize },
    #[error("empty instance")]
    Empty,
    #[error("block {0} cannot fit under the layer limit")]
    Infeasible(usize),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("useful cycle time must be positive (cycle {cycle} ps, overhead {overhead} ps)")]
    NoUsefulTime { cycle: f64, overhead: f64 },
    #[error("floorplan is empty")]
    EmptyFloorplan,
    #[error("floorplan footprint has zero area")]
    ZeroArea,
}
