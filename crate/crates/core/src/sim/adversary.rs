use std::collections::HashSet;
use std::sync::Arc;

use crate::chain::{Block, BlockId, BlockTree, Digest, NewBlock, Origin, Transaction, TxId};
use crate::checkpoint::ServiceConfig;
use crate::error::Result;
use crate::fork_choice::{is_block_acceptable, main_tip, referring_block_on};
use crate::parallel::PcCertificate;

use super::config::Strategy;

/// Blocks the adversary produced or published in one round.
#[derive(Clone, Debug, Default)]
pub struct Actions {
    /// Newly mined blocks, with whether each is being withheld.
    pub mined: Vec<(Arc<Block>, bool)>,
    /// Blocks made public this round (possibly mined earlier).
    pub released: Vec<Arc<Block>>,
}

/// The coalition of adversarial miners. It sees every block the moment it
/// is mined and every certificate the moment it is issued.
#[derive(Clone, Debug)]
pub struct Adversary {
    strategy: Strategy,
    config: ServiceConfig,
    hooks: bool,
    seed: u64,
    trees: Vec<BlockTree>,
    latest: PcCertificate,
    /// Per chain: tip of the private fork and its unreleased blocks.
    private_tip: Vec<Option<BlockId>>,
    withheld: Vec<Vec<Arc<Block>>>,
    mined: u64,
}

impl Adversary {
    pub fn new(strategy: Strategy, config: ServiceConfig, hooks: bool, seed: u64, chains: u32) -> Self {
        let trees: Vec<BlockTree> = (0..chains).map(|m| BlockTree::new(Block::genesis(m))).collect();
        let genesis: Vec<BlockId> = trees.iter().map(|t| t.genesis()).collect();
        Adversary {
            strategy,
            config,
            hooks,
            seed,
            latest: PcCertificate::bootstrap(&genesis),
            trees,
            private_tip: vec![None; chains as usize],
            withheld: vec![Vec::new(); chains as usize],
            mined: 0,
        }
    }

    /// Every block ever mined, honest or not.
    pub fn trees(&self) -> &[BlockTree] {
        &self.trees
    }

    pub fn withheld_count(&self) -> usize {
        self.withheld.iter().map(Vec::len).sum()
    }

    pub fn observe_block(&mut self, block: &Arc<Block>) {
        if let Some(tree) = self.trees.get_mut(block.chain_id as usize) {
            if !tree.contains(&block.id) {
                tree.insert_arc(Arc::clone(block)).expect("adversary sees every parent first");
            }
        }
    }

    pub fn observe_cert(&mut self, pc: &PcCertificate) {
        if pc.cert.index > self.latest.cert.index {
            self.latest = pc.clone();
        }
    }

    /// Mines `count` blocks this round. `open` is the honest transaction
    /// pool, used only by the honest-mining strategy.
    pub fn act(&mut self, round: u64, count: u32, chains: &[u32], open: &[Transaction]) -> Result<Actions> {
        let mut actions = Actions::default();
        for &chain in &chains[..count as usize] {
            match self.strategy {
                Strategy::PrivateMiningBursts => self.mine_private(round, chain, &mut actions)?,
                Strategy::Censorship => {
                    let b = self.mine_public(round, chain, Vec::new())?;
                    actions.mined.push((b, false));
                }
                Strategy::None => {
                    let txs = self.mempool(chain, open)?;
                    let b = self.mine_public(round, chain, txs)?;
                    actions.mined.push((b, false));
                }
            }
        }
        Ok(actions)
    }

    /// Publishes everything still withheld.
    pub fn release_all(&mut self) -> Vec<Arc<Block>> {
        self.withheld.iter_mut().flat_map(std::mem::take).collect()
    }

    fn mine_public(&mut self, round: u64, chain: u32, txs: Vec<Transaction>) -> Result<Arc<Block>> {
        let view = self.latest.view(chain, &self.config)?;
        let parent = main_tip(&self.trees[chain as usize], &view)?;
        self.build(round, chain, parent, txs)
    }

    fn mine_private(&mut self, round: u64, chain: u32, actions: &mut Actions) -> Result<()> {
        let m = chain as usize;
        let parent = match self.private_tip[m] {
            Some(tip) if self.extendable(round, chain, tip)? => tip,
            _ => {
                actions.released.append(&mut self.withheld[m]);
                self.latest.anchor(chain)
            }
        };
        let block = self.build(round, chain, parent, Vec::new())?;
        self.private_tip[m] = Some(block.id);
        self.withheld[m].push(Arc::clone(&block));
        actions.mined.push((block, true));
        if self.withheld[m].len() as u64 >= self.config.epoch_e {
            actions.released.append(&mut self.withheld[m]);
        }
        Ok(())
    }

    /// Whether a child of `tip` mined now would be acceptable under the
    /// latest certificate.
    fn extendable(&self, round: u64, chain: u32, tip: BlockId) -> Result<bool> {
        let probe = self.template(round, chain, tip, Vec::new(), u64::MAX)?;
        let view = self.latest.view(chain, &self.config)?;
        Ok(is_block_acceptable(&self.trees[chain as usize], &view, &probe))
    }

    fn template(&self, round: u64, chain: u32, parent: BlockId, txs: Vec<Transaction>, nonce: u64) -> Result<Block> {
        let tree = &self.trees[chain as usize];
        let view = self.latest.view(chain, &self.config)?;
        let needs_cert = self.config.rule.embeds_certificates()
            && !self.latest.cert.is_bootstrap()
            && tree.is_ancestor(&view.anchor, &parent)
            && referring_block_on(tree, &view, &parent)?.is_none();
        let mut nb = NewBlock::child_of(parent, Origin::Adversarial, round, nonce)
            .on_chain(chain)
            .with_txs(txs);
        if needs_cert {
            nb = nb.with_cert(self.latest.cert.clone());
        }
        if self.hooks {
            nb = nb.with_hook(self.latest.cert.index);
        }
        Ok(nb.seal())
    }

    fn build(&mut self, round: u64, chain: u32, parent: BlockId, txs: Vec<Transaction>) -> Result<Arc<Block>> {
        self.mined += 1;
        let mut buf = Vec::with_capacity(24);
        buf.extend_from_slice(b"adv");
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&self.mined.to_le_bytes());
        let nonce = u64::from_le_bytes(Digest::of(&buf).0[..8].try_into().unwrap());
        let block = Arc::new(self.template(round, chain, parent, txs, nonce)?);
        self.observe_block(&block);
        Ok(block)
    }

    fn mempool(&self, chain: u32, open: &[Transaction]) -> Result<Vec<Transaction>> {
        let tree = &self.trees[chain as usize];
        let tip = main_tip(tree, &self.latest.view(chain, &self.config)?)?;
        let on_chain: HashSet<TxId> = tree
            .path_to(&tip)?
            .iter()
            .flat_map(|id| tree.get(id).into_iter().flat_map(|b| b.txs.iter().map(|t| t.id)))
            .collect();
        Ok(open.iter().filter(|t| !on_chain.contains(&t.id)).cloned().collect())
    }
}
