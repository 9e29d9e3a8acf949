//! Comparison checkpointing schemes: certificates naming a single block,
//! with no reference lists.
//!
//! * Stochastic checkpointing embeds each certificate on chain within the
//!   window and attaches a fresh nonce. A chain that runs past the window
//!   without embedding it was necessarily mined before the nonce existed,
//!   and is invalid.
//! * Nakamoto checkpointing publishes certificates off-chain; nodes follow
//!   the longest chain through the latest checkpointed block.

use serde::{Deserialize, Serialize};

use crate::chain::{Block, BlockId, BlockTree, Certificate, Signature};
use crate::checkpoint::{CheckpointService, ServiceConfig};
use crate::error::{Error, Result};
use crate::fork_choice::Rule;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineCert {
    pub index: u64,
    pub checkpointed_block: BlockId,
    pub nonce: Option<u64>,
    pub signature: Signature,
}

impl From<&Certificate> for BaselineCert {
    fn from(c: &Certificate) -> Self {
        BaselineCert {
            index: c.index,
            checkpointed_block: c.checkpointed_block,
            nonce: c.nonce,
            signature: c.signature,
        }
    }
}

pub fn stochastic_config(epoch_e: u64, window_c: u64, nonce_seed: u64) -> ServiceConfig {
    ServiceConfig {
        rule: Rule::Stochastic,
        nonce_seed,
        ..ServiceConfig::advocate(epoch_e, window_c)
    }
}

pub fn nakamoto_config(epoch_e: u64, window_c: u64) -> ServiceConfig {
    ServiceConfig {
        rule: Rule::Nakamoto,
        ..ServiceConfig::advocate(epoch_e, window_c)
    }
}

fn step(
    rule: Rule,
    tree: &BlockTree,
    state: &mut CheckpointService,
    block: &Block,
    round: u64,
) -> Result<Option<BaselineCert>> {
    if state.config().rule != rule {
        return Err(Error::Config(format!(
            "service runs {:?}, expected {rule:?}",
            state.config().rule
        )));
    }
    Ok(state
        .on_new_block(tree, block, round)?
        .as_ref()
        .map(BaselineCert::from))
}

pub fn stochastic_checkpoint_step(
    tree: &BlockTree,
    state: &mut CheckpointService,
    block: &Block,
    round: u64,
) -> Result<Option<BaselineCert>> {
    step(Rule::Stochastic, tree, state, block, round)
}

pub fn nakamoto_checkpoint_step(
    tree: &BlockTree,
    state: &mut CheckpointService,
    block: &Block,
    round: u64,
) -> Result<Option<BaselineCert>> {
    step(Rule::Nakamoto, tree, state, block, round)
}
