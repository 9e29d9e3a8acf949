use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::chain::{merkle_root, Block, BlockId, BlockTree, TxId, Transaction};
use crate::checkpoint::ServiceConfig;
use crate::error::{Error, Result};
use crate::fork_choice::{main_tip, referring_block_on, Rule};
use crate::ledger::{AggregateLedger, BlockOrderBuilder, LedgerEntry};
use crate::parallel::PcCertificate;

use super::network::CertMessage;

/// One block tree per chain plus a buffer for blocks whose parent has not
/// arrived yet.
#[derive(Clone, Debug)]
pub struct LocalTrees {
    trees: Vec<BlockTree>,
    orphans: HashMap<BlockId, Vec<Arc<Block>>>,
}

impl LocalTrees {
    pub fn new(chains: u32) -> Self {
        LocalTrees {
            trees: (0..chains).map(|m| BlockTree::new(Block::genesis(m))).collect(),
            orphans: HashMap::new(),
        }
    }

    pub fn trees(&self) -> &[BlockTree] {
        &self.trees
    }

    pub fn tree(&self, chain: u32) -> &BlockTree {
        &self.trees[chain as usize]
    }

    pub fn get(&self, id: &BlockId) -> Option<&Block> {
        self.trees.iter().find_map(|t| t.get(id))
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.trees.iter().any(|t| t.contains(id))
    }

    /// Inserts `block` and any buffered descendants; returns what joined a
    /// tree. Blocks without valid proof of work are dropped.
    pub fn insert(&mut self, block: Arc<Block>) -> Vec<Arc<Block>> {
        let Some(tree) = self.trees.get_mut(block.chain_id as usize) else {
            return Vec::new();
        };
        if !block.pow_valid || tree.contains(&block.id) {
            return Vec::new();
        }
        if !tree.contains(&block.parent) {
            self.orphans.entry(block.parent).or_default().push(block);
            return Vec::new();
        }
        let mut added = Vec::new();
        let mut queue = vec![block];
        while let Some(b) = queue.pop() {
            let tree = &mut self.trees[b.chain_id as usize];
            if tree.insert_arc(Arc::clone(&b)).is_ok() {
                if let Some(kids) = self.orphans.remove(&b.id) {
                    queue.extend(kids);
                }
                added.push(b);
            }
        }
        added
    }
}

/// Outcome of a certificate adoption.
#[derive(Clone, Debug, Default)]
pub struct Adoption {
    pub indices: Vec<u64>,
    /// Stable blocks appended, in ledger order.
    pub blocks: Vec<BlockId>,
    /// Stable ledger entries appended.
    pub entries: Vec<LedgerEntry>,
}

/// An honest node: its trees, adopted certificates and stable ledger.
#[derive(Clone, Debug)]
pub struct Party {
    pub id: u32,
    local: LocalTrees,
    config: ServiceConfig,
    certs: Vec<PcCertificate>,
    /// Certificates waiting for their blocks, by index.
    waiting: BTreeMap<u64, Arc<CertMessage>>,
    closed: bool,
    builder: BlockOrderBuilder,
    ledger: AggregateLedger,
}

impl Party {
    pub fn new(id: u32, chains: u32, config: ServiceConfig) -> Self {
        let local = LocalTrees::new(chains);
        let genesis: Vec<BlockId> = local.trees().iter().map(|t| t.genesis()).collect();
        Party {
            id,
            local,
            config,
            certs: vec![PcCertificate::bootstrap(&genesis)],
            waiting: BTreeMap::new(),
            closed: false,
            builder: BlockOrderBuilder::new(),
            ledger: AggregateLedger::new(),
        }
    }

    pub fn local(&self) -> &LocalTrees {
        &self.local
    }

    pub fn latest(&self) -> &PcCertificate {
        self.certs.last().expect("bootstrap certificate is always present")
    }

    pub fn certificates(&self) -> &[PcCertificate] {
        &self.certs
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Stable block order.
    pub fn stable_blocks(&self) -> &[BlockId] {
        self.builder.order()
    }

    pub fn stable_ledger(&self) -> &AggregateLedger {
        &self.ledger
    }

    pub fn receive_block(&mut self, block: Arc<Block>) -> Vec<Arc<Block>> {
        self.local.insert(block)
    }

    /// Queues a certificate; forged or inconsistent ones are dropped.
    pub fn receive_cert(&mut self, msg: Arc<CertMessage>) {
        let cert = &msg.pc.cert;
        if !cert.signature.valid || cert.index <= self.latest().cert.index {
            return;
        }
        if cert.merkle_root.is_some_and(|root| root != merkle_root(&cert.references)) {
            return;
        }
        self.waiting.entry(cert.index).or_insert(msg);
    }

    pub fn has_waiting(&self) -> bool {
        !self.waiting.is_empty()
    }

    /// Adopts queued certificates in index order once every block they
    /// name is local.
    pub fn try_adopt(&mut self) -> Result<Adoption> {
        let mut out = Adoption::default();
        while let Some((&index, msg)) = self.waiting.first_key_value() {
            let next = self.latest().cert.index + 1;
            if index < next {
                self.waiting.remove(&index);
                continue;
            }
            if index > next || !self.has_blocks_for(&msg.pc) {
                break;
            }
            let msg = self.waiting.remove(&index).expect("just seen");
            self.adopt(&msg, &mut out)?;
        }
        Ok(out)
    }

    fn has_blocks_for(&self, pc: &PcCertificate) -> bool {
        self.local.tree(0).contains(&pc.base_ref())
            && pc.tips.iter().all(|t| self.local.contains(t))
            && pc.references().iter().all(|r| self.local.contains(r))
    }

    fn adopt(&mut self, msg: &CertMessage, out: &mut Adoption) -> Result<()> {
        let prev = self.latest().clone();
        let base = msg.pc.base_ref();
        let tree = self.local.tree(0);
        let referring = if prev.cert.is_bootstrap() || self.config.rule == Rule::Nakamoto {
            Some(prev.base_ref())
        } else {
            referring_block_on(tree, &prev.view(0, &self.config)?, &base)?
        };
        let referring = referring.ok_or(Error::MissingReferringBlock { index: prev.cert.index })?;
        let mut placed = self.builder.extend_main(tree, &referring)?;
        placed.extend(self.builder.extend_refs(prev.references()));
        placed.extend(self.builder.extend_main(tree, &base)?);
        if msg.closing {
            placed.extend(self.builder.extend_refs(msg.pc.references()));
            self.closed = true;
        }
        for id in &placed {
            let before = self.ledger.len();
            self.ledger.apply_block(self.local.get(id).ok_or(Error::UnknownBlock(*id))?);
            out.entries.extend_from_slice(&self.ledger.entries()[before..]);
        }
        out.blocks.extend(placed);
        out.indices.push(msg.pc.cert.index);
        self.certs.push(msg.pc.clone());
        Ok(())
    }

    pub fn main_tip(&self, chain: u32) -> Result<BlockId> {
        main_tip(self.local.tree(chain), &self.latest().view(chain, &self.config)?)
    }

    /// Length in blocks of the ledger this party would currently report:
    /// the stable part, the main chain past the last checkpoint, and the
    /// latest certificate's references once its referring block is on
    /// that chain.
    pub fn live_ledger_len(&self) -> Result<u64> {
        let latest = self.latest();
        let tree = self.local.tree(0);
        let view = latest.view(0, &self.config)?;
        let tip = main_tip(tree, &view)?;
        let tail = tree.depth(&tip).unwrap_or(0) - tree.depth(&latest.base_ref()).unwrap_or(0);
        let pending = if referring_block_on(tree, &view, &tip)?.is_some() && !latest.cert.is_bootstrap() {
            latest.references().iter().filter(|r| !self.builder.contains(r)).count() as u64
        } else {
            0
        };
        Ok(self.builder.order().len() as u64 + tail + pending)
    }

    /// Open transactions not yet stable here and not on any of this
    /// party's main chains.
    pub fn mempool(&self, open: &[Transaction]) -> Result<Vec<Transaction>> {
        let mut on_chain: HashSet<TxId> = HashSet::new();
        for m in 0..self.local.trees().len() as u32 {
            let tree = self.local.tree(m);
            let mut cursor = Some(self.main_tip(m)?);
            while let Some(id) = cursor {
                if self.builder.contains(&id) {
                    break;
                }
                let b = tree.block(&id)?;
                on_chain.extend(b.txs.iter().map(|t| t.id));
                cursor = tree.parent(&id);
            }
        }
        Ok(open
            .iter()
            .filter(|t| !on_chain.contains(&t.id) && self.ledger.position(&t.id).is_none())
            .cloned()
            .collect())
    }
}
