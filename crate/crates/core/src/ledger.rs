//! Aggregate ledger: main-chain segments interleaved with the blocks each
//! certificate references, then sanitized transaction by transaction.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::chain::{Block, BlockId, BlockTree, Certificate, Origin, TxId};
use crate::error::{Error, Result};

/// Incrementally assembles `Chain_1 ∥ π(F_1) ∥ Chain_2 ∥ π(F_2) ∥ …`.
#[derive(Clone, Debug, Default)]
pub struct BlockOrderBuilder {
    order: Vec<BlockId>,
    placed: HashSet<BlockId>,
    main_cursor: Option<BlockId>,
}

impl BlockOrderBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn order(&self) -> &[BlockId] {
        &self.order
    }

    pub fn into_order(self) -> Vec<BlockId> {
        self.order
    }

    pub fn main_cursor(&self) -> Option<BlockId> {
        self.main_cursor
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.placed.contains(id)
    }

    /// Appends main-chain blocks after the current cursor up to and
    /// including `to`; returns the blocks newly placed.
    pub fn extend_main(&mut self, tree: &BlockTree, to: &BlockId) -> Result<Vec<BlockId>> {
        let segment = match self.main_cursor {
            None => tree.path_to(to)?,
            Some(cursor) if cursor == *to => Vec::new(),
            Some(cursor) => tree.segment(&cursor, to)?,
        };
        self.main_cursor = Some(*to);
        Ok(self.place(segment))
    }

    /// Appends referenced blocks in the given order, skipping any already
    /// placed.
    pub fn extend_refs<'a>(&mut self, refs: impl IntoIterator<Item = &'a BlockId>) -> Vec<BlockId> {
        self.place(refs.into_iter().copied())
    }

    fn place(&mut self, ids: impl IntoIterator<Item = BlockId>) -> Vec<BlockId> {
        let mut added = Vec::new();
        for id in ids {
            if self.placed.insert(id) {
                self.order.push(id);
                added.push(id);
            }
        }
        added
    }
}

/// Block order of the aggregate ledger. `referring` maps certificate index
/// to the referring block on the final main chain; only the last
/// certificate may lack one, in which case the chain runs to its
/// checkpointed block and its references are withheld.
pub fn build_block_order(
    tree: &BlockTree,
    certs: &[Certificate],
    referring: &BTreeMap<u64, BlockId>,
) -> Result<Vec<BlockId>> {
    let mut builder = BlockOrderBuilder::new();
    for (k, cert) in certs.iter().enumerate() {
        let last = k + 1 == certs.len();
        match referring.get(&cert.index) {
            Some(r) => {
                builder
                    .extend_main(tree, r)
                    .map_err(|_| Error::MissingReferringBlock { index: cert.index })?;
                builder.extend_refs(&cert.references);
            }
            None if last => {
                builder
                    .extend_main(tree, &cert.checkpointed_block)
                    .map_err(|_| Error::MissingReferringBlock { index: cert.index })?;
            }
            None => return Err(Error::MissingReferringBlock { index: cert.index }),
        }
    }
    Ok(builder.into_order())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tx: TxId,
    pub block: BlockId,
    pub origin: Origin,
    pub created_round: u64,
}

/// Sanitized transaction sequence. Each transaction provides `outputs`
/// spendable units; each input consumes one unit of the named transaction.
#[derive(Clone, Debug, Default)]
pub struct AggregateLedger {
    blocks: Vec<BlockId>,
    /// Entry count after each block in `blocks`.
    block_tx_end: Vec<usize>,
    block_index: HashMap<BlockId, usize>,
    entries: Vec<LedgerEntry>,
    position: HashMap<TxId, usize>,
    unspent: HashMap<TxId, u32>,
}

impl AggregateLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block_order(&self) -> &[BlockId] {
        &self.blocks
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn tx_order(&self) -> impl Iterator<Item = TxId> + '_ {
        self.entries.iter().map(|e| e.tx)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, tx: &TxId) -> Option<usize> {
        self.position.get(tx).copied()
    }

    pub fn block_position(&self, block: &BlockId) -> Option<usize> {
        self.block_index.get(block).copied()
    }

    /// Remaining spendable units of `tx`.
    pub fn unspent(&self, tx: &TxId) -> u32 {
        self.unspent.get(tx).copied().unwrap_or(0)
    }

    /// Number of entries contributed by the first `blocks` blocks.
    pub fn entries_through(&self, blocks: usize) -> usize {
        match blocks {
            0 => 0,
            n => self.block_tx_end[n.min(self.block_tx_end.len()) - 1],
        }
    }

    /// Appends `block`'s transactions, dropping duplicates and spends of
    /// unavailable outputs. A repeated block is ignored.
    pub fn apply_block(&mut self, block: &Block) {
        if self.block_index.contains_key(&block.id) {
            return;
        }
        for tx in &block.txs {
            if self.position.contains_key(&tx.id) {
                continue;
            }
            let mut need: BTreeMap<TxId, u32> = BTreeMap::new();
            for input in &tx.inputs {
                *need.entry(*input).or_default() += 1;
            }
            if need.iter().any(|(id, n)| self.unspent(id) < *n) {
                continue;
            }
            for (id, n) in need {
                *self.unspent.get_mut(&id).expect("checked above") -= n;
            }
            self.unspent.insert(tx.id, tx.outputs);
            self.position.insert(tx.id, self.entries.len());
            self.entries.push(LedgerEntry {
                tx: tx.id,
                block: block.id,
                origin: tx.origin,
                created_round: tx.created_round,
            });
        }
        self.block_index.insert(block.id, self.blocks.len());
        self.blocks.push(block.id);
        self.block_tx_end.push(self.entries.len());
    }

    /// One line per transaction: `position txid block origin`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (pos, e) in self.entries.iter().enumerate() {
            writeln!(out, "{pos} {} {} {}", e.tx, e.block, e.origin.as_str()).unwrap();
        }
        out
    }
}

/// Walks `block_order` and sanitizes its transactions.
pub fn sanitize(block_order: &[BlockId], tree: &BlockTree) -> Result<AggregateLedger> {
    sanitize_with(block_order, |id| tree.get(id))
}

/// `sanitize` over blocks spread across several trees.
pub fn sanitize_with<'a, F>(block_order: &[BlockId], lookup: F) -> Result<AggregateLedger>
where
    F: Fn(&BlockId) -> Option<&'a Block>,
{
    let mut ledger = AggregateLedger::new();
    for id in block_order {
        ledger.apply_block(lookup(id).ok_or(Error::UnknownBlock(*id))?);
    }
    Ok(ledger)
}

/// Entry index below which the ledger is final: everything up to and
/// including the latest checkpointed block present in the ledger.
pub fn stable_prefix(ledger: &AggregateLedger, certs: &[Certificate]) -> usize {
    stable_block_prefix(ledger, certs)
        .map_or(0, |blocks| ledger.entries_through(blocks))
}

/// Block count of the stable prefix, if any checkpointed block is placed.
pub fn stable_block_prefix(ledger: &AggregateLedger, certs: &[Certificate]) -> Option<usize> {
    certs
        .iter()
        .rev()
        .find_map(|c| ledger.block_position(&c.checkpointed_block))
        .map(|pos| pos + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{NewBlock, Signature, Transaction};
    use crate::checkpoint::bootstrap_certificate;

    fn add(tree: &mut BlockTree, parent: BlockId, nonce: u64, txs: Vec<Transaction>) -> BlockId {
        let b = NewBlock::child_of(parent, Origin::Honest, nonce, nonce)
            .with_txs(txs)
            .seal();
        let id = b.id;
        tree.insert(b).unwrap();
        id
    }

    fn cert(index: u64, block: BlockId, refs: Vec<BlockId>) -> Certificate {
        Certificate {
            index,
            checkpointed_block: block,
            references: refs,
            signature: Signature::by(0),
            merkle_root: None,
            witness: None,
            nonce: None,
            issued_round: 0,
        }
    }

    #[test]
    fn single_epoch_without_uncles_is_the_main_chain() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let a = add(&mut tree, g, 1, vec![]);
        let b = add(&mut tree, a, 2, vec![]);
        let c0 = bootstrap_certificate();
        let c1 = cert(1, a, vec![]);
        let referring = BTreeMap::from([(0, g), (1, b)]);
        assert_eq!(
            build_block_order(&tree, &[c0, c1], &referring).unwrap(),
            vec![g, a, b]
        );
    }

    #[test]
    fn uncles_follow_their_referring_block() {
        // Main chain g-1-2-4-6-7-8 with uncles 3 (below 2) and 5 (below 4);
        // C_1 checkpoints 7 and is carried by 8.
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let b1 = add(&mut tree, g, 1, vec![]);
        let b2 = add(&mut tree, b1, 2, vec![]);
        let u3 = add(&mut tree, b2, 3, vec![]);
        let b4 = add(&mut tree, b2, 4, vec![]);
        let u5 = add(&mut tree, b4, 5, vec![]);
        let b6 = add(&mut tree, b4, 6, vec![]);
        let b7 = add(&mut tree, b6, 7, vec![]);
        let b8 = add(&mut tree, b7, 8, vec![]);
        let refs = crate::chain::canonical_block_order(&[u3, u5], &tree).unwrap();
        let c1 = cert(1, b7, refs.clone());
        let referring = BTreeMap::from([(0, g), (1, b8)]);
        let order = build_block_order(&tree, &[bootstrap_certificate(), c1], &referring).unwrap();
        assert_eq!(&order[..7], &[g, b1, b2, b4, b6, b7, b8]);
        assert_eq!(&order[7..], refs.as_slice());
    }

    #[test]
    fn sibling_uncles_in_id_order() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let x = add(&mut tree, g, 1, vec![]);
        let y = add(&mut tree, g, 2, vec![]);
        let main = add(&mut tree, g, 3, vec![]);
        let r = add(&mut tree, main, 4, vec![]);
        let refs = crate::chain::canonical_block_order(&[y, x], &tree).unwrap();
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        assert_eq!(refs, vec![lo, hi]);
        let c1 = cert(1, main, refs);
        let order = build_block_order(
            &tree,
            &[bootstrap_certificate(), c1],
            &BTreeMap::from([(0, g), (1, r)]),
        )
        .unwrap();
        assert_eq!(order, vec![g, main, r, lo, hi]);
    }

    #[test]
    fn missing_referring_block_before_last_is_an_error() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let a = add(&mut tree, g, 1, vec![]);
        let b = add(&mut tree, a, 2, vec![]);
        let certs = [bootstrap_certificate(), cert(1, a, vec![]), cert(2, b, vec![])];
        let err = build_block_order(&tree, &certs, &BTreeMap::from([(0, g)])).unwrap_err();
        assert!(matches!(err, Error::MissingReferringBlock { index: 1 }));
        let ok = build_block_order(&tree, &certs[..2], &BTreeMap::from([(0, g)])).unwrap();
        assert_eq!(ok, vec![g, a]);
    }

    #[test]
    fn sanitization_drops_duplicates_and_double_spends() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let mint = Transaction::mint(1, Origin::Honest, 1);
        let spend_a = Transaction::new(vec![mint.id], 1, 2, Origin::Honest, 2);
        let spend_b = Transaction::new(vec![mint.id], 1, 2, Origin::Adversarial, 3);
        let orphan = Transaction::new(vec![TxId::ZERO], 1, 2, Origin::Honest, 4);
        let a = add(&mut tree, g, 1, vec![mint.clone(), spend_a.clone()]);
        let uncle = add(&mut tree, g, 2, vec![mint.clone(), spend_b, orphan]);
        let ledger = sanitize(&[g, a, uncle], &tree).unwrap();
        assert_eq!(ledger.tx_order().collect::<Vec<_>>(), vec![mint.id, spend_a.id]);
        assert_eq!(ledger.unspent(&mint.id), 0);
        assert_eq!(ledger.position(&spend_a.id), Some(1));
    }

    #[test]
    fn sanitization_is_identity_on_clean_input() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let txs: Vec<_> = (0..4).map(|n| Transaction::mint(n, Origin::Honest, n)).collect();
        let a = add(&mut tree, g, 1, txs[..2].to_vec());
        let b = add(&mut tree, a, 2, txs[2..].to_vec());
        let ledger = sanitize(&[g, a, b], &tree).unwrap();
        assert_eq!(
            ledger.tx_order().collect::<Vec<_>>(),
            txs.iter().map(|t| t.id).collect::<Vec<_>>()
        );
        let dump = ledger.dump();
        assert_eq!(dump.lines().count(), 4);
        assert!(dump.starts_with(&format!("0 {} {} honest\n", txs[0].id, a)));
    }

    #[test]
    fn stable_prefix_tracks_latest_checkpoint() {
        let mut tree = BlockTree::new(Block::genesis(0));
        let g = tree.genesis();
        let b1 = add(&mut tree, g, 1, vec![Transaction::mint(1, Origin::Honest, 1)]);
        let r1 = add(&mut tree, b1, 2, vec![Transaction::mint(2, Origin::Honest, 2)]);
        let u = add(&mut tree, g, 3, vec![Transaction::mint(3, Origin::Honest, 3)]);
        let b2 = add(&mut tree, r1, 4, vec![Transaction::mint(4, Origin::Honest, 4)]);
        let c0 = bootstrap_certificate();
        let c1 = cert(1, b1, vec![u]);
        let c2 = cert(2, b2, vec![]);

        let only_c0 = sanitize(&[g], &tree).unwrap();
        assert_eq!(stable_prefix(&only_c0, std::slice::from_ref(&c0)), 0);

        let order = build_block_order(&tree, &[c0.clone(), c1.clone()], &BTreeMap::from([(0, g), (1, r1)])).unwrap();
        let ledger = sanitize(&order, &tree).unwrap();
        // Main chain through B_1 only; r1 and the uncle are provisional.
        assert_eq!(stable_prefix(&ledger, &[c0.clone(), c1.clone()]), 1);

        let order = build_block_order(&tree, &[c0.clone(), c1.clone(), c2.clone()], &BTreeMap::from([(0, g), (1, r1)])).unwrap();
        assert_eq!(order, vec![g, b1, r1, u, b2]);
        let ledger = sanitize(&order, &tree).unwrap();
        assert_eq!(stable_prefix(&ledger, &[c0, c1, c2]), 4);
    }
}
