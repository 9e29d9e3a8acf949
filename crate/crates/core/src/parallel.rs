//! Parallel payload chains: one base chain carries the checkpoint, M - 1
//! further chains are anchored at the tips recorded in each certificate.
//!
//! Chain `m` lives in its own [`BlockTree`] and rank is depth within that
//! tree. A non-base chain's window is measured from its recorded tip, so a
//! chain that missed the previous certificate keeps its old anchor.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::chain::{canonical_block_order, Block, BlockId, BlockTree, Certificate};
use crate::checkpoint::{CheckpointService, ServiceConfig};
use crate::error::{Error, Result};
use crate::fork_choice::{is_block_acceptable, main_tip, referring_block_on, CheckpointView};
use crate::ledger::{build_block_order, sanitize_with, AggregateLedger};

/// A certificate plus the checkpointed tip of every non-base chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcCertificate {
    pub cert: Certificate,
    /// `tips[m - 1]` anchors chain `m`; empty on a single chain.
    pub tips: Vec<BlockId>,
}

impl PcCertificate {
    pub fn single(cert: Certificate) -> Self {
        PcCertificate { cert, tips: Vec::new() }
    }

    /// Bootstrap: every chain anchored at its own genesis.
    pub fn bootstrap(genesis: &[BlockId]) -> Self {
        PcCertificate {
            cert: crate::checkpoint::bootstrap_certificate_for(genesis[0]),
            tips: genesis[1..].to_vec(),
        }
    }

    pub fn base_ref(&self) -> BlockId {
        self.cert.checkpointed_block
    }

    pub fn references(&self) -> &[BlockId] {
        &self.cert.references
    }

    /// Window anchor for `chain`.
    pub fn anchor(&self, chain: u32) -> BlockId {
        match chain {
            0 => self.cert.checkpointed_block,
            m => self.tips[m as usize - 1],
        }
    }

    /// Fork-choice view for `chain` under `config`.
    pub fn view(&self, chain: u32, config: &ServiceConfig) -> Result<CheckpointView<'_>> {
        Ok(CheckpointView::new(&self.cert, config.window_c, config.epoch_e, config.rule)?
            .with_anchor(self.anchor(chain)))
    }
}

/// Validity of `block` on its own chain under the latest certificate:
/// it extends the chain's anchor and carries the certificate within the
/// window, exactly like a base-chain block.
pub fn pc_block_valid(trees: &[BlockTree], latest: &PcCertificate, config: &ServiceConfig, block: &Block) -> bool {
    let Some(tree) = trees.get(block.chain_id as usize) else {
        return false;
    };
    latest
        .view(block.chain_id, config)
        .is_ok_and(|view| is_block_acceptable(tree, &view, block))
}

/// Checkpoint service over M chains. The base chain is driven by an
/// ordinary [`CheckpointService`]; non-base blocks are appended to its
/// reference list grouped by chain, each group in canonical order.
#[derive(Clone, Debug)]
pub struct PcService {
    base: CheckpointService,
    certs: Vec<PcCertificate>,
    /// Referenced blocks of chains 1..M.
    referenced: Vec<HashSet<BlockId>>,
}

impl PcService {
    pub fn new(config: ServiceConfig, genesis: &[BlockId]) -> Result<Self> {
        if genesis.is_empty() {
            return Err(Error::Config("parallel chains need at least one chain".into()));
        }
        Ok(PcService {
            base: CheckpointService::new(config, genesis[0])?,
            certs: vec![PcCertificate::bootstrap(genesis)],
            referenced: genesis[1..].iter().map(|g| HashSet::from([*g])).collect(),
        })
    }

    pub fn chains(&self) -> u32 {
        self.certs[0].tips.len() as u32 + 1
    }

    pub fn config(&self) -> &ServiceConfig {
        self.base.config()
    }

    pub fn certificates(&self) -> &[PcCertificate] {
        &self.certs
    }

    pub fn last(&self) -> &PcCertificate {
        self.certs.last().expect("bootstrap certificate is always present")
    }

    pub fn base(&self) -> &CheckpointService {
        &self.base
    }

    pub fn has_pending(&self) -> bool {
        self.base.has_pending()
    }

    /// Issues the next certificate once the base chain reaches the next
    /// epoch depth.
    pub fn poll(&mut self, trees: &[BlockTree], round: u64) -> Result<Option<PcCertificate>> {
        let Some(block) = self.base.poll_candidate(&trees[0], round)? else {
            return Ok(None);
        };
        let rank = trees[0].depth(&block).ok_or(Error::UnknownBlock(block))?;
        self.finish(trees, block, round, Some(rank), false).map(Some)
    }

    /// Final certificate over `tip`, referencing every remaining block.
    pub fn close(&mut self, trees: &[BlockTree], tip: BlockId, round: u64) -> Result<PcCertificate> {
        self.finish(trees, tip, round, None, true)
    }

    pub fn can_close(&self, trees: &[BlockTree], tip: &BlockId) -> bool {
        self.base.can_close(&trees[0], tip)
    }

    fn finish(
        &mut self,
        trees: &[BlockTree],
        block: BlockId,
        round: u64,
        rank: Option<u64>,
        closing: bool,
    ) -> Result<PcCertificate> {
        let tips = self.next_tips(trees)?;
        let extra = self.non_base_references(trees, rank)?;
        let cert = if closing {
            self.base.close_with(&trees[0], block, round, extra)?
        } else {
            self.base.issue(&trees[0], block, round, extra)?
        };
        let pc = PcCertificate { cert, tips };
        self.certs.push(pc.clone());
        Ok(pc)
    }

    /// A chain's tip advances only if its main chain already refers to
    /// the previous certificate.
    fn next_tips(&self, trees: &[BlockTree]) -> Result<Vec<BlockId>> {
        let prev = self.last();
        let config = self.base.config();
        (1..trees.len() as u32)
            .map(|m| {
                let tree = &trees[m as usize];
                let view = prev.view(m, config)?;
                let tip = main_tip(tree, &view)?;
                let eligible = prev.cert.is_bootstrap() || referring_block_on(tree, &view, &tip)?.is_some();
                Ok(if eligible { tip } else { prev.anchor(m) })
            })
            .collect()
    }

    fn non_base_references(&mut self, trees: &[BlockTree], rank: Option<u64>) -> Result<Vec<BlockId>> {
        let mut out = Vec::new();
        for (tree, seen) in trees[1..].iter().zip(self.referenced.iter_mut()) {
            let set: BTreeSet<BlockId> = tree
                .blocks()
                .filter(|b| !seen.contains(&b.id))
                .filter(|b| rank.is_none_or(|r| tree.depth(&b.id).is_some_and(|d| d <= r)))
                .map(|b| b.id)
                .collect();
            let ordered = canonical_block_order(&set, tree)?;
            seen.extend(ordered.iter().copied());
            out.extend(ordered);
        }
        Ok(out)
    }
}

/// Aggregate ledger over all chains: base-chain segments, each followed by
/// its certificate's references, sanitized across every tree.
pub fn pc_build_ledger(
    trees: &[BlockTree],
    certs: &[PcCertificate],
    referring: &BTreeMap<u64, BlockId>,
) -> Result<AggregateLedger> {
    let plain: Vec<Certificate> = certs.iter().map(|c| c.cert.clone()).collect();
    let order = build_block_order(&trees[0], &plain, referring)?;
    sanitize_with(&order, |id| trees.iter().find_map(|t| t.get(id)))
}
