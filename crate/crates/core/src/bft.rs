//! Federated checkpointing: an ideal ordered log with bounded finalization
//! delay, the committee that drives it, and validity-gated delivery between
//! committee replicas.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{merkle_root, Block, BlockId, BlockTree, Certificate, Digest, FinalityWitness};
use crate::checkpoint::{CheckpointService, ServiceConfig};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BftConfig {
    /// Committee size.
    pub n: u32,
    /// Byzantine committee members tolerated.
    pub f: u32,
    /// Finalization delay in rounds.
    pub delta_bft: u64,
}

impl BftConfig {
    pub fn new(n: u32, f: u32, delta_bft: u64) -> Result<Self> {
        if n < 3 * f + 1 {
            return Err(Error::Config(format!("committee needs n >= 3f+1, got n={n} f={f}")));
        }
        if n == 0 || n > 64 {
            return Err(Error::Config(format!("committee size {n} outside 1..=64")));
        }
        Ok(BftConfig { n, f, delta_bft })
    }

    pub fn quorum(&self) -> u32 {
        self.n - self.f
    }

    /// Smallest admissible inclusion window: `base + ⌈finalization / round⌉`
    /// with one-round ticks.
    pub fn min_window(&self, base_window: u64) -> u64 {
        base_window + self.delta_bft
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmrEntry {
    BlockRef { block: BlockId, depth: u64 },
    /// Checkpoint transaction: hash of the checkpointed block and Merkle
    /// root of the references.
    Checkpoint { index: u64, block: BlockId, merkle_root: Digest },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmrTx {
    pub entry: SmrEntry,
    pub posted_round: u64,
    pub finalized_round: u64,
}

/// Append-only replicated log; entries become final `delta_bft` rounds
/// after posting.
#[derive(Clone, Debug)]
pub struct SmrChain {
    delta_bft: u64,
    entries: Vec<SmrTx>,
    /// Number of final entries.
    finalized: usize,
    refs: HashMap<BlockId, usize>,
}

impl SmrChain {
    pub fn new(delta_bft: u64) -> Self {
        SmrChain {
            delta_bft,
            entries: Vec::new(),
            finalized: 0,
            refs: HashMap::new(),
        }
    }

    pub fn entries(&self) -> &[SmrTx] {
        &self.entries
    }

    /// Entries at indices below this are final.
    pub fn finalized_upto(&self) -> usize {
        self.finalized
    }

    pub fn contains_block(&self, id: &BlockId) -> bool {
        self.refs.contains_key(id)
    }

    /// Appends ⟨hash, depth⟩ unless already present; returns the entry
    /// index when appended.
    pub fn post_block_reference(&mut self, block: &Block, depth: u64, round: u64) -> Option<usize> {
        if self.refs.contains_key(&block.id) {
            return None;
        }
        let idx = self.push(
            SmrEntry::BlockRef {
                block: block.id,
                depth,
            },
            round,
        );
        self.refs.insert(block.id, idx);
        Some(idx)
    }

    pub fn post_checkpoint(&mut self, index: u64, block: BlockId, merkle_root: Digest, round: u64) -> usize {
        self.push(
            SmrEntry::Checkpoint {
                index,
                block,
                merkle_root,
            },
            round,
        )
    }

    fn push(&mut self, entry: SmrEntry, round: u64) -> usize {
        // Posting rounds never decrease, so finalization stays in log order.
        let posted_round = self.entries.last().map_or(round, |e| e.posted_round.max(round));
        self.entries.push(SmrTx {
            entry,
            posted_round,
            finalized_round: posted_round + self.delta_bft,
        });
        self.entries.len() - 1
    }

    /// Finalizes every entry due by `round`; returns the newly final range.
    pub fn advance(&mut self, round: u64) -> std::ops::Range<usize> {
        let start = self.finalized;
        while self.finalized < self.entries.len() && self.entries[self.finalized].finalized_round <= round {
            self.finalized += 1;
        }
        start..self.finalized
    }

    /// One line per entry: `index posted finalized kind fields…`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, tx) in self.entries.iter().enumerate() {
            match &tx.entry {
                SmrEntry::BlockRef { block, depth } => writeln!(
                    out,
                    "{i} {} {} ref {block} {depth}",
                    tx.posted_round, tx.finalized_round
                ),
                SmrEntry::Checkpoint {
                    index,
                    block,
                    merkle_root,
                } => writeln!(
                    out,
                    "{i} {} {} checkpoint {index} {block} {merkle_root}",
                    tx.posted_round, tx.finalized_round
                ),
            }
            .unwrap();
        }
        out
    }
}

/// Inclusion rules for a block reference: valid proof of work, and no
/// block at the next checkpoint depth on a chain that skips the latest
/// checkpointed block. Availability is the caller's tree.
pub fn smr_block_validity(tree: &BlockTree, last_cert: &Certificate, epoch_e: u64, block: &Block) -> Result<()> {
    if !block.pow_valid {
        return Err(Error::InvalidBlock(block.id));
    }
    let parent_depth = tree.depth(&block.parent).ok_or(Error::InvalidBlock(block.id))?;
    let anchor = &last_cert.checkpointed_block;
    let anchor_depth = tree.depth(anchor).ok_or(Error::UnknownCheckpoint(*anchor))?;
    if parent_depth + 1 == anchor_depth + epoch_e && !tree.is_ancestor(anchor, &block.parent) {
        return Err(Error::CheckpointConflict(block.id));
    }
    Ok(())
}

/// Certificate for the checkpoint transaction at `smr_index`, once final.
pub fn smr_emit_checkpoint(
    chain: &SmrChain,
    draft: &Certificate,
    smr_index: usize,
    quorum_bitmap: u64,
    committee_size: u32,
) -> Option<Certificate> {
    if smr_index >= chain.finalized_upto() {
        return None;
    }
    match &chain.entries()[smr_index].entry {
        SmrEntry::Checkpoint {
            index,
            block,
            merkle_root,
        } if *index == draft.index && *block == draft.checkpointed_block => {
            let mut cert = draft.clone();
            cert.merkle_root = Some(*merkle_root);
            cert.witness = Some(FinalityWitness {
                smr_index: smr_index as u64,
                quorum_bitmap,
                committee_size,
            });
            Some(cert)
        }
        _ => None,
    }
}

/// Total transaction latency from its mining, posting, finalization and
/// checkpoint components.
pub fn transaction_latency(tau_m: i64, tau_t: i64, tau_f: i64, tau_c: i64) -> Result<u64> {
    for (name, v) in [("tau_m", tau_m), ("tau_t", tau_t), ("tau_f", tau_f), ("tau_c", tau_c)] {
        if v < 0 {
            return Err(Error::NegativeComponent(name));
        }
    }
    Ok((tau_m + tau_t + tau_f + tau_c) as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Smr(SmrTx),
    Certificate(Certificate),
}

impl Payload {
    fn block(&self) -> BlockId {
        match self {
            Payload::Smr(tx) => match tx.entry {
                SmrEntry::BlockRef { block, .. } | SmrEntry::Checkpoint { block, .. } => block,
            },
            Payload::Certificate(c) => c.checkpointed_block,
        }
    }
}

/// A downloaded message awaiting the validity handler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PendingMessage {
    pub id: u64,
    pub payload: Payload,
    pub arrived_round: u64,
    pub deadline: u64,
}

impl PendingMessage {
    pub fn new(id: u64, payload: Payload, arrived_round: u64, delta: u64) -> Self {
        PendingMessage {
            id,
            payload,
            arrived_round,
            deadline: arrived_round + delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delivery {
    Delivered,
    Deferred,
    Rejected,
}

/// Validity handler: deliver once the referenced block is local and valid,
/// wait up to the deadline otherwise.
pub fn nuni_deliver(msg: &PendingMessage, local_tree: &BlockTree, round: u64) -> Delivery {
    match local_tree.get(&msg.payload.block()) {
        Some(b) if b.pow_valid => Delivery::Delivered,
        Some(_) => Delivery::Rejected,
        None if round < msg.deadline => Delivery::Deferred,
        None => Delivery::Rejected,
    }
}

/// First-receipt and per-replica receipt rounds of one message.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiptRecord {
    pub message: u64,
    pub received: Vec<Option<u64>>,
}

#[derive(Clone, Debug)]
struct Replica {
    byzantine: bool,
    tree: BlockTree,
    orphans: HashMap<BlockId, Vec<Arc<Block>>>,
    inbox: Vec<PendingMessage>,
}

impl Replica {
    fn receive(&mut self, block: Arc<Block>) {
        if self.tree.contains(&block.id) {
            return;
        }
        if !self.tree.contains(&block.parent) {
            self.orphans.entry(block.parent).or_default().push(block);
            return;
        }
        let mut queue = vec![block];
        while let Some(b) = queue.pop() {
            let id = b.id;
            if self.tree.insert_arc(b).is_ok() {
                if let Some(kids) = self.orphans.remove(&id) {
                    queue.extend(kids);
                }
            }
        }
    }
}

struct DraftCheckpoint {
    cert: Certificate,
    smr_index: usize,
}

/// The checkpointing committee. Replica 0 is the honest leader: it posts
/// references for blocks it receives, runs the checkpoint rule on the tree
/// of finalized references, and posts checkpoint transactions. The last
/// `f` replicas are Byzantine and withhold their votes.
pub struct Committee {
    config: BftConfig,
    delta: u64,
    smr: SmrChain,
    tree: BlockTree,
    blocks: HashMap<BlockId, Arc<Block>>,
    service: CheckpointService,
    draft: Option<DraftCheckpoint>,
    replicas: Vec<Replica>,
    receipts: Vec<ReceiptRecord>,
    rejected: Vec<BlockId>,
}

impl Committee {
    pub fn new(config: BftConfig, service: ServiceConfig, genesis: Block, delta: u64) -> Result<Self> {
        let g = genesis.id;
        let tree = BlockTree::new(genesis);
        let replicas = (0..config.n)
            .map(|k| Replica {
                byzantine: k >= config.n - config.f,
                tree: tree.clone(),
                orphans: HashMap::new(),
                inbox: Vec::new(),
            })
            .collect();
        Ok(Committee {
            config,
            delta,
            smr: SmrChain::new(config.delta_bft),
            blocks: HashMap::new(),
            service: CheckpointService::new(service, g)?,
            tree,
            draft: None,
            replicas,
            receipts: Vec::new(),
            rejected: Vec::new(),
        })
    }

    pub fn config(&self) -> &BftConfig {
        &self.config
    }

    pub fn smr(&self) -> &SmrChain {
        &self.smr
    }

    /// Tree of finalized block references.
    pub fn tree(&self) -> &BlockTree {
        &self.tree
    }

    pub fn certificates(&self) -> &[Certificate] {
        self.service.certificates()
    }

    pub fn receipts(&self) -> &[ReceiptRecord] {
        &self.receipts
    }

    /// Blocks refused by the inclusion rules.
    pub fn rejected(&self) -> &[BlockId] {
        &self.rejected
    }

    pub fn has_pending_checkpoint(&self) -> bool {
        self.draft.is_some()
    }

    fn honest_bitmap(&self) -> u64 {
        self.replicas
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.byzantine)
            .fold(0u64, |acc, (k, _)| acc | (1 << k))
    }

    /// A replica's network layer downloaded `block`. Replica 0's receipts
    /// become SMR posts.
    pub fn receive_block(&mut self, replica: usize, block: Arc<Block>, round: u64) {
        self.replicas[replica].receive(Arc::clone(&block));
        if replica == 0 {
            let id = block.id;
            self.blocks.entry(id).or_insert(block);
            self.post_ready(id, round);
        }
    }

    /// Posts `start` and any leader-known descendants, parents first.
    fn post_ready(&mut self, start: BlockId, round: u64) {
        let leader = &self.replicas[0].tree;
        let parent_posted = leader
            .get(&start)
            .is_some_and(|b| b.parent == self.tree.genesis() || self.smr.contains_block(&b.parent));
        if !parent_posted {
            return;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            if self.smr.contains_block(&id) {
                continue;
            }
            let b = Arc::clone(&self.blocks[&id]);
            let depth = self.replicas[0].tree.depth(&id).expect("leader holds the block");
            let idx = self.smr.post_block_reference(&b, depth, round).expect("not yet posted");
            let msg = PendingMessage::new(idx as u64, Payload::Smr(self.smr.entries()[idx].clone()), round, self.delta);
            self.broadcast(msg, round);
            let mut kids: Vec<BlockId> = self.replicas[0].tree.children(&id).copied().collect();
            kids.retain(|c| !self.smr.contains_block(c));
            for c in &kids {
                if !self.blocks.contains_key(c) {
                    let arc = Arc::clone(self.replicas[0].tree.get_arc(c).expect("child in leader tree"));
                    self.blocks.insert(*c, arc);
                }
            }
            kids.sort_unstable();
            queue.extend(kids);
        }
    }

    /// Leader broadcasts `msg`; every replica downloads it this round and
    /// validates it locally.
    fn broadcast(&mut self, msg: PendingMessage, round: u64) {
        let mut record = ReceiptRecord {
            message: msg.id,
            received: vec![None; self.replicas.len()],
        };
        record.received[0] = Some(round);
        self.receipts.push(record);
        for r in self.replicas.iter_mut().skip(1) {
            r.inbox.push(msg.clone());
        }
    }

    /// Runs validity handlers, finalization and the checkpoint rule.
    /// Returns certificates whose checkpoint transaction became final.
    pub fn step(&mut self, round: u64) -> Result<Vec<Certificate>> {
        self.run_validity_handlers(round);
        let mut out = Vec::new();
        loop {
            let fresh = self.smr.advance(round);
            for i in fresh.clone() {
                if let SmrEntry::BlockRef { block, .. } = self.smr.entries()[i].entry {
                    let b = Arc::clone(&self.blocks[&block]);
                    self.insert_checked(b);
                }
            }
            if let Some(d) = &self.draft {
                if let Some(cert) = smr_emit_checkpoint(&self.smr, &d.cert, d.smr_index, self.honest_bitmap(), self.config.n) {
                    self.draft = None;
                    out.push(cert);
                }
            }
            if self.draft.is_none() {
                if let Some(cert) = self.service.poll(&self.tree, round)? {
                    self.post_draft(cert, round);
                    continue;
                }
            }
            if fresh.is_empty() {
                break;
            }
        }
        Ok(out)
    }

    fn insert_checked(&mut self, block: Arc<Block>) {
        let id = block.id;
        if !self.tree.contains(&block.parent) {
            self.rejected.push(id);
            return;
        }
        match smr_block_validity(&self.tree, self.service.last_cert(), self.service.config().epoch_e, &block) {
            Ok(()) => {
                self.tree.insert_arc(block).expect("parent finalized earlier");
            }
            Err(_) => self.rejected.push(id),
        }
    }

    fn post_draft(&mut self, mut cert: Certificate, round: u64) {
        let root = merkle_root(&cert.references);
        cert.merkle_root = Some(root);
        let idx = self.smr.post_checkpoint(cert.index, cert.checkpointed_block, root, round);
        let msg = PendingMessage::new(idx as u64, Payload::Smr(self.smr.entries()[idx].clone()), round, self.delta);
        self.broadcast(msg, round);
        self.draft = Some(DraftCheckpoint { cert, smr_index: idx });
    }

    fn run_validity_handlers(&mut self, round: u64) {
        for (k, replica) in self.replicas.iter_mut().enumerate().skip(1) {
            let mut keep = Vec::new();
            for msg in replica.inbox.drain(..) {
                match nuni_deliver(&msg, &replica.tree, round) {
                    Delivery::Delivered => {
                        if !replica.byzantine {
                            if let Some(rec) = self.receipts.iter_mut().rev().find(|r| r.message == msg.id) {
                                rec.received[k] = Some(round);
                            }
                        }
                    }
                    Delivery::Deferred => keep.push(msg),
                    Delivery::Rejected => {}
                }
            }
            replica.inbox = keep;
        }
    }

    /// Final checkpoint over `tip`; completes once its transaction is final.
    pub fn close(&mut self, tip: BlockId, round: u64) -> Result<()> {
        if self.draft.is_some() {
            return Err(Error::Config("a checkpoint is still being finalized".into()));
        }
        let cert = self.service.close(&self.tree, tip, round)?;
        self.post_draft(cert, round);
        Ok(())
    }

    /// Latest checkpointed block agreed by the committee.
    pub fn last_checkpoint(&self) -> &Certificate {
        self.service.last_cert()
    }

    /// Main-chain tip of the committee's finalized tree.
    pub fn main_tip(&self) -> Result<BlockId> {
        crate::fork_choice::main_tip(&self.tree, &self.service.view())
    }

    /// Δ-synchrony violations among honest replicas: messages some honest
    /// replica marked received more than Δ rounds after the first.
    pub fn synchrony_violations(&self) -> Vec<u64> {
        self.receipts
            .iter()
            .filter(|rec| {
                let honest: Vec<Option<u64>> = rec
                    .received
                    .iter()
                    .zip(&self.replicas)
                    .filter(|(_, r)| !r.byzantine)
                    .map(|(x, _)| *x)
                    .collect();
                let first = honest.iter().flatten().min().copied();
                match first {
                    Some(t) => honest.iter().any(|x| x.is_none_or(|x| x > t + self.delta)),
                    None => false,
                }
            })
            .map(|rec| rec.message)
            .collect()
    }

    /// Messages still awaiting validation at some replica.
    pub fn in_flight(&self) -> usize {
        self.replicas.iter().map(|r| r.inbox.len()).sum()
    }
}
