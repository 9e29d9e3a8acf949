use thiserror::Error;

use crate::chain::BlockId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parent {parent} of block {block} is not in the tree")]
    UnknownParent { block: BlockId, parent: BlockId },
    #[error("block {0} is already in the tree")]
    DuplicateBlock(BlockId),
    #[error("block {0} is not in the tree")]
    UnknownBlock(BlockId),
    #[error("input set contains a cycle")]
    CyclicInput,
    #[error("checkpointed block {0} is not in the tree")]
    UnknownCheckpoint(BlockId),
    #[error("block {block} at depth {depth} is below the last checkpoint at depth {checkpoint_depth}")]
    StaleBlock {
        block: BlockId,
        depth: u64,
        checkpoint_depth: u64,
    },
    #[error("certificate {index} has no referring block on the main chain")]
    MissingReferringBlock { index: u64 },
    #[error("block {0} conflicts with the latest checkpoint")]
    CheckpointConflict(BlockId),
    #[error("block {0} is invalid")]
    InvalidBlock(BlockId),
    #[error("latency component {0} is negative")]
    NegativeComponent(&'static str),
    #[error("safety violation at round {round}: {detail}")]
    SafetyViolation { round: u64, detail: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("argument outside the formula's domain: {0}")]
    Domain(String),
    #[error("run and reference run differ in more than the adversary: {0}")]
    MismatchedConfigs(String),
    #[error("window contains no honest or adversarial blocks")]
    EmptyWindow,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}
