//! Main-chain selection under the latest checkpoint certificate.
//!
//! Given certificate C_i checkpointing block B at depth d, a chain is
//! acceptable when it contains B and, past depth d + c, contains a block
//! within depths (d, d + c] that embeds C_i (a referring block). The main
//! chain is
//!
//! 1. the longest chain through any referring block, if one exists;
//! 2. otherwise the longest chain through B, when its tip is fewer than c
//!    blocks past B;
//! 3. otherwise a chain through B whose tip sits at depth d + c - 1.
//!
//! Length ties resolve to the smallest tip id everywhere.

use serde::{Deserialize, Serialize};

use crate::chain::{Block, BlockId, BlockTree, Certificate, Transaction};
use crate::error::{Error, Result};

/// Which fork-choice discipline a node follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Certificates must be embedded within the window.
    Advocate,
    /// Same window discipline as `Advocate`; certificates carry a nonce
    /// and no references, so a chain pre-mined past B before the
    /// certificate existed cannot pass the window.
    Stochastic,
    /// Certificates live off-chain; any chain through B is acceptable.
    Nakamoto,
}

impl Rule {
    pub fn embeds_certificates(self) -> bool {
        !matches!(self, Rule::Nakamoto)
    }
}

/// A node's checkpoint state as seen by the fork-choice rule.
#[derive(Clone, Copy, Debug)]
pub struct CheckpointView<'a> {
    pub cert: &'a Certificate,
    /// Block the window is measured from; the checkpointed block on a
    /// single chain, a chain's checkpointed tip for parallel chains.
    pub anchor: BlockId,
    pub window_c: u64,
    pub epoch_e: u64,
    pub rule: Rule,
}

impl<'a> CheckpointView<'a> {
    pub fn new(cert: &'a Certificate, window_c: u64, epoch_e: u64, rule: Rule) -> Result<Self> {
        if window_c == 0 || epoch_e <= window_c {
            return Err(Error::Config(format!(
                "need epoch > window >= 1, got e={epoch_e} c={window_c}"
            )));
        }
        Ok(CheckpointView {
            cert,
            anchor: cert.checkpointed_block,
            window_c,
            epoch_e,
            rule,
        })
    }

    pub fn with_anchor(mut self, anchor: BlockId) -> Self {
        self.anchor = anchor;
        self
    }

    fn anchor_depth(&self, tree: &BlockTree) -> Result<u64> {
        tree.depth(&self.anchor)
            .ok_or(Error::UnknownCheckpoint(self.anchor))
    }

    /// The bootstrap certificate is referred to by genesis itself.
    fn bootstrap_referred(&self, tree: &BlockTree) -> bool {
        self.cert.is_bootstrap() && self.anchor == tree.genesis()
    }

}

/// Blocks in the window below the anchor that embed the certificate and
/// whose path from the anchor is acceptable, ascending by depth then id.
pub fn referring_candidates(tree: &BlockTree, view: &CheckpointView<'_>) -> Result<Vec<BlockId>> {
    let d = view.anchor_depth(tree)?;
    if view.bootstrap_referred(tree) {
        return Ok(vec![view.anchor]);
    }
    if !view.rule.embeds_certificates() {
        return Ok(Vec::new());
    }
    Ok(window_blocks(tree, view, d)
        .into_iter()
        .filter(|id| tree.get(id).is_some_and(|b| b.embeds(view.cert)))
        .collect())
}

/// Acceptable blocks strictly below the anchor up to depth d + c.
fn window_blocks(tree: &BlockTree, view: &CheckpointView<'_>, d: u64) -> Vec<BlockId> {
    tree.descendants_within(&view.anchor, d + view.window_c)
}

/// The earliest referring block: lowest depth, then lowest id.
pub fn earliest_referring_block(
    tree: &BlockTree,
    view: &CheckpointView<'_>,
) -> Result<Option<BlockId>> {
    Ok(referring_candidates(tree, view)?.first().copied())
}

/// The referring block on the chain ending at `tip`, if any.
pub fn referring_block_on(
    tree: &BlockTree,
    view: &CheckpointView<'_>,
    tip: &BlockId,
) -> Result<Option<BlockId>> {
    let d = view.anchor_depth(tree)?;
    if view.bootstrap_referred(tree) {
        return Ok(tree.is_ancestor(&view.anchor, tip).then_some(view.anchor));
    }
    if !view.rule.embeds_certificates() || !tree.is_ancestor(&view.anchor, tip) {
        return Ok(None);
    }
    let tip_depth = tree.depth(tip).ok_or(Error::UnknownBlock(*tip))?;
    let top = tip_depth.min(d + view.window_c);
    let mut cursor = tree.ancestor_at_depth(tip, top).expect("depth within tip");
    let mut found = None;
    for _ in d + 1..=top {
        if tree.block(&cursor)?.embeds(view.cert) {
            found = Some(cursor);
        }
        cursor = tree.parent(&cursor).expect("not genesis");
    }
    Ok(found)
}

/// Tip of the selected main chain.
pub fn main_tip(tree: &BlockTree, view: &CheckpointView<'_>) -> Result<BlockId> {
    let d = view.anchor_depth(tree)?;
    if view.rule == Rule::Nakamoto || view.bootstrap_referred(tree) {
        return Ok(tree.deepest_leaf(&view.anchor)?.1);
    }
    let candidates = referring_candidates(tree, view)?;
    let best = candidates
        .iter()
        .map(|r| tree.deepest_leaf(r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    if let Some((_, tip)) = best {
        return Ok(tip);
    }
    let window = window_blocks(tree, view, d);
    let deepest = window
        .iter()
        .filter_map(|id| tree.depth(id))
        .max()
        .unwrap_or(d);
    let tip_depth = if deepest - d < view.window_c {
        deepest
    } else {
        d + view.window_c - 1
    };
    if tip_depth == d {
        return Ok(view.anchor);
    }
    Ok(window
        .into_iter()
        .filter(|id| tree.depth(id) == Some(tip_depth))
        .min()
        .expect("a block exists at every depth up to the deepest"))
}

/// Main chain, genesis first.
pub fn select_main_chain(tree: &BlockTree, view: &CheckpointView<'_>) -> Result<Vec<BlockId>> {
    tree.path_to(&main_tip(tree, view)?)
}

/// Whether `block` (parent in `tree`, block itself possibly absent) may
/// extend the tree under `view`.
pub fn is_block_acceptable(tree: &BlockTree, view: &CheckpointView<'_>, block: &Block) -> bool {
    let Some(d) = tree.depth(&view.anchor) else {
        return false;
    };
    let Some(parent_depth) = tree.depth(&block.parent) else {
        return false;
    };
    let depth = parent_depth + 1;
    let through_anchor = depth > d && tree.is_ancestor(&view.anchor, &block.parent);
    if !through_anchor {
        return false;
    }
    if let Some(cert) = &block.embedded_cert {
        if !cert.signature.valid || !embed_position_ok(tree, view, block, depth, cert) {
            return false;
        }
    }
    if view.rule == Rule::Nakamoto || view.bootstrap_referred(tree) {
        return true;
    }
    if depth <= d + view.window_c {
        return true;
    }
    matches!(referring_block_on(tree, view, &block.parent), Ok(Some(_)))
}

fn embed_position_ok(
    tree: &BlockTree,
    view: &CheckpointView<'_>,
    block: &Block,
    depth: u64,
    cert: &Certificate,
) -> bool {
    if cert.index == view.cert.index {
        if cert.id() != view.cert.id() {
            return false;
        }
        let d = tree.depth(&view.anchor).unwrap_or(0);
        return depth <= d + view.window_c;
    }
    if cert.index > view.cert.index {
        return true;
    }
    match tree.depth(&cert.checkpointed_block) {
        Some(cd) => {
            depth > cd
                && depth <= cd + view.window_c
                && (block.parent == cert.checkpointed_block
                    || tree.is_ancestor(&cert.checkpointed_block, &block.parent))
        }
        None => false,
    }
}

/// What a miner puts into its next block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTemplate {
    pub parent: BlockId,
    pub txs: Vec<Transaction>,
    pub embedded_cert: Option<Certificate>,
    pub hook: Option<u64>,
}

/// Template extending the main chain: the whole mempool, plus C_i when the
/// main chain has no referring block yet.
pub fn next_block_template(
    tree: &BlockTree,
    view: &CheckpointView<'_>,
    mempool: &[Transaction],
    hooks: bool,
) -> Result<BlockTemplate> {
    let tip = main_tip(tree, view)?;
    let needs_cert = view.rule.embeds_certificates()
        && !view.cert.is_bootstrap()
        && referring_block_on(tree, view, &tip)?.is_none();
    Ok(BlockTemplate {
        parent: tip,
        txs: mempool.to_vec(),
        embedded_cert: needs_cert.then(|| view.cert.clone()),
        hook: hooks.then_some(view.cert.index),
    })
}
