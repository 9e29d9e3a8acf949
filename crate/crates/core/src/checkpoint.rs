//! The single checkpointing party and its hooks variant.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::chain::{canonical_block_order, Block, BlockId, BlockTree, Certificate, Digest, Signature};
use crate::error::{Error, Result};
use crate::fork_choice::{main_tip, CheckpointView, Rule};

/// The bootstrap certificate C_0 for the chain rooted at `genesis`.
pub fn bootstrap_certificate_for(genesis: BlockId) -> Certificate {
    Certificate {
        index: 0,
        checkpointed_block: genesis,
        references: vec![genesis],
        signature: Signature::by(0),
        merkle_root: None,
        witness: None,
        nonce: None,
        issued_round: 0,
    }
}

/// C_0 over the single-chain genesis.
pub fn bootstrap_certificate() -> Certificate {
    bootstrap_certificate_for(Block::genesis(0).id)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub epoch_e: u64,
    pub window_c: u64,
    /// Hooks window t; `None` for plain operation.
    pub hook_t: Option<u64>,
    /// Rounds between spotting a candidate and signing it.
    pub service_delay: u64,
    pub rule: Rule,
    pub issuer: u32,
    /// Seed for per-certificate nonces; stochastic rule only.
    pub nonce_seed: u64,
}

impl ServiceConfig {
    pub fn advocate(epoch_e: u64, window_c: u64) -> Self {
        ServiceConfig {
            epoch_e,
            window_c,
            hook_t: None,
            service_delay: 0,
            rule: Rule::Advocate,
            issuer: 0,
            nonce_seed: 0,
        }
    }

    /// Certificates carry reference lists only under the Advocate rule.
    pub fn references_uncles(&self) -> bool {
        self.rule == Rule::Advocate
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pending {
    candidate: BlockId,
    ready_round: u64,
}

/// Checkpointing party state. Drive it with [`CheckpointService::poll`]
/// after every change to its block tree.
#[derive(Clone, Debug)]
pub struct CheckpointService {
    config: ServiceConfig,
    certs: Vec<Certificate>,
    /// Blocks referenced so far plus the checkpointed main-chain prefix.
    referenced: HashSet<BlockId>,
    /// Blocks a hooks-mode certificate may no longer reference.
    expired: HashSet<BlockId>,
    pending: Option<Pending>,
}

impl CheckpointService {
    pub fn new(config: ServiceConfig, genesis: BlockId) -> Result<Self> {
        if config.window_c == 0 || config.epoch_e <= config.window_c {
            return Err(Error::Config(format!(
                "need epoch > window >= 1, got e={} c={}",
                config.epoch_e, config.window_c
            )));
        }
        if config.hook_t == Some(0) {
            return Err(Error::Config("hook window t must be positive".into()));
        }
        Ok(CheckpointService {
            config,
            certs: vec![bootstrap_certificate_for(genesis)],
            referenced: HashSet::from([genesis]),
            expired: HashSet::new(),
            pending: None,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn certificates(&self) -> &[Certificate] {
        &self.certs
    }

    pub fn last_cert(&self) -> &Certificate {
        self.certs.last().expect("bootstrap certificate is always present")
    }

    pub fn is_referenced(&self, id: &BlockId) -> bool {
        self.referenced.contains(id)
    }

    pub fn hook_expired(&self) -> &HashSet<BlockId> {
        &self.expired
    }

    pub fn view(&self) -> CheckpointView<'_> {
        CheckpointView {
            cert: self.last_cert(),
            anchor: self.last_cert().checkpointed_block,
            window_c: self.config.window_c,
            epoch_e: self.config.epoch_e,
            rule: self.config.rule,
        }
    }

    /// The block at the next epoch depth on the service's main chain.
    pub fn candidate(&self, tree: &BlockTree) -> Result<Option<BlockId>> {
        let view = self.view();
        let d = tree
            .depth(&view.anchor)
            .ok_or(Error::UnknownCheckpoint(view.anchor))?;
        let tip = main_tip(tree, &view)?;
        Ok(tree.ancestor_at_depth(&tip, d + self.config.epoch_e))
    }

    /// Reacts to `block` having joined `tree`. Emits a certificate when the
    /// block sits exactly one epoch past the last checkpoint on the main
    /// chain and no signing delay applies.
    pub fn on_new_block(&mut self, tree: &BlockTree, block: &Block, round: u64) -> Result<Option<Certificate>> {
        let d = tree
            .depth(&self.last_cert().checkpointed_block)
            .ok_or(Error::UnknownCheckpoint(self.last_cert().checkpointed_block))?;
        let depth = tree.depth(&block.id).ok_or(Error::UnknownBlock(block.id))?;
        if depth <= d {
            return Err(Error::StaleBlock {
                block: block.id,
                depth,
                checkpoint_depth: d,
            });
        }
        if depth != d + self.config.epoch_e || self.candidate(tree)? != Some(block.id) {
            return Ok(None);
        }
        self.poll(tree, round)
    }

    /// Advances the service by one observation of `tree` at `round`.
    pub fn poll(&mut self, tree: &BlockTree, round: u64) -> Result<Option<Certificate>> {
        match self.poll_candidate(tree, round)? {
            Some(c) => self.issue(tree, c, round, Vec::new()).map(Some),
            None => Ok(None),
        }
    }

    /// Signing-delay bookkeeping: returns the candidate once it has stayed
    /// on the main chain for `service_delay` rounds. The caller must then
    /// issue a certificate for it.
    pub fn poll_candidate(&mut self, tree: &BlockTree, round: u64) -> Result<Option<BlockId>> {
        let candidate = self.candidate(tree)?;
        match (self.pending, candidate) {
            (Some(p), Some(c)) if p.candidate == c => {
                if round >= p.ready_round {
                    self.pending = None;
                    return Ok(Some(c));
                }
                Ok(None)
            }
            (_, Some(c)) => {
                if self.config.service_delay == 0 {
                    self.pending = None;
                    return Ok(Some(c));
                }
                self.pending = Some(Pending {
                    candidate: c,
                    ready_round: round + self.config.service_delay,
                });
                Ok(None)
            }
            (_, None) => {
                self.pending = None;
                Ok(None)
            }
        }
    }

    /// True while a candidate waits out the signing delay.
    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    /// Reference list a certificate checkpointing `block` would carry.
    pub fn references_for(&self, tree: &BlockTree, block: &BlockId) -> Result<(Vec<BlockId>, Vec<BlockId>)> {
        if !self.config.references_uncles() {
            return Ok((Vec::new(), Vec::new()));
        }
        let next_index = self.last_cert().index + 1;
        let main: HashSet<BlockId> = tree.path_to(block)?.into_iter().collect();
        let mut expired = Vec::new();
        let mut set = BTreeSet::new();
        for b in tree.blocks() {
            let id = b.id;
            if self.referenced.contains(&id)
                || self.expired.contains(&id)
                || main.contains(&id)
                || tree.is_ancestor(block, &id)
            {
                continue;
            }
            if let (Some(t), Some(j)) = (self.config.hook_t, b.hook) {
                if next_index.saturating_sub(j) > t {
                    expired.push(id);
                    continue;
                }
            }
            set.insert(id);
        }
        expired.sort_unstable();
        Ok((canonical_block_order(&set, tree)?, expired))
    }

    fn nonce_for(&self, index: u64) -> Option<u64> {
        (self.config.rule == Rule::Stochastic).then(|| {
            let mut buf = Vec::with_capacity(16);
            buf.extend_from_slice(&self.config.nonce_seed.to_le_bytes());
            buf.extend_from_slice(&index.to_le_bytes());
            u64::from_le_bytes(Digest::of(&buf).0[..8].try_into().unwrap())
        })
    }

    /// Signs a certificate for `block`, appending `extra` references (blocks
    /// outside `tree`, already in their final order) after the uncles.
    pub fn issue(&mut self, tree: &BlockTree, block: BlockId, round: u64, extra: Vec<BlockId>) -> Result<Certificate> {
        let (mut references, expired) = self.references_for(tree, &block)?;
        let index = self.last_cert().index + 1;
        self.referenced.extend(tree.path_to(&block)?);
        self.referenced.extend(references.iter().copied());
        self.referenced.extend(extra.iter().copied());
        references.extend(extra);
        self.expired.extend(expired);
        let cert = Certificate {
            index,
            checkpointed_block: block,
            references,
            signature: Signature::by(self.config.issuer),
            merkle_root: None,
            witness: None,
            nonce: self.nonce_for(index),
            issued_round: round,
        };
        self.certs.push(cert.clone());
        Ok(cert)
    }

    /// Final certificate: checkpoints `tip` (a descendant of the last
    /// checkpoint) and references every remaining block.
    pub fn close(&mut self, tree: &BlockTree, tip: BlockId, round: u64) -> Result<Certificate> {
        self.close_with(tree, tip, round, Vec::new())
    }

    /// `close` with extra out-of-tree references, as in `issue`.
    pub fn close_with(&mut self, tree: &BlockTree, tip: BlockId, round: u64, extra: Vec<BlockId>) -> Result<Certificate> {
        let anchor = self.last_cert().checkpointed_block;
        if tip == anchor || !tree.is_ancestor(&anchor, &tip) {
            return Err(Error::StaleBlock {
                block: tip,
                depth: tree.depth(&tip).unwrap_or(0),
                checkpoint_depth: tree.depth(&anchor).unwrap_or(0),
            });
        }
        self.pending = None;
        self.issue(tree, tip, round, extra)
    }

    /// Whether `close` would accept `tip`.
    pub fn can_close(&self, tree: &BlockTree, tip: &BlockId) -> bool {
        let anchor = self.last_cert().checkpointed_block;
        *tip != anchor && tree.is_ancestor(&anchor, tip)
    }

    /// Installs a certificate produced elsewhere (for example by a
    /// committee) as the service's latest.
    pub fn adopt(&mut self, tree: &BlockTree, cert: Certificate) -> Result<()> {
        if cert.index != self.last_cert().index + 1 {
            return Err(Error::Config(format!(
                "certificate {} does not follow {}",
                cert.index,
                self.last_cert().index
            )));
        }
        self.referenced.extend(tree.path_to(&cert.checkpointed_block)?);
        self.referenced.extend(cert.references.iter().copied());
        self.pending = None;
        self.certs.push(cert);
        Ok(())
    }
}
