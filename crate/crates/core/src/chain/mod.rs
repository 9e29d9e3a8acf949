//! Blocks, transactions, certificates and the append-only block tree shared
//! by every protocol variant.

pub mod codec;
mod merkle;
mod order;
mod tree;
mod types;

pub use merkle::merkle_root;
pub use order::canonical_block_order;
pub use tree::BlockTree;
pub use types::{
    Block, BlockId, Certificate, Digest, FinalityWitness, NewBlock, Origin, Signature,
    Transaction, TxId, GENESIS_SEED,
};
