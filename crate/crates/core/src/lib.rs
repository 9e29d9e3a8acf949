//! Checkpointing gadgets for bootstrapping proof-of-work chains under an
//! adversarial mining majority.
//!
//! The crate contains the protocol logic (block tree, the checkpoint-aware
//! main-chain rule, the checkpointing service, aggregate ledger construction
//! and sanitization), a federated checkpointing variant driven by an
//! abstract BFT state-machine-replication log, a parallel-chain variant,
//! two baseline checkpointing schemes, and a deterministic round-based
//! simulator with a metrics harness.

pub mod baselines;
pub mod bft;
pub mod chain;
pub mod checkpoint;
pub mod error;
pub mod experiment;
pub mod fork_choice;
pub mod ledger;
pub mod metrics;
pub mod parallel;
pub mod sim;

pub use chain::{
    canonical_block_order, merkle_root, Block, BlockId, BlockTree, Certificate, Origin, Signature,
    Transaction, TxId,
};
pub use error::{Error, Result};
