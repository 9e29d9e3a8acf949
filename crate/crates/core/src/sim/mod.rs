//! Deterministic round-based simulator.
//!
//! Each round: deliver due messages, create transactions, run the honest
//! lottery, let the adversary act (after seeing the round's honest block),
//! step the checkpointing side, then check invariants. After the last
//! scheduled round the adversary releases everything it withholds, the
//! network drains, and a closing certificate ends the run.

mod adversary;
mod config;
mod log;
mod network;
mod party;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::bft::Committee;
use crate::chain::{Block, BlockId, BlockTree, Digest, NewBlock, Origin, Transaction, TxId};
use crate::checkpoint::{CheckpointService, ServiceConfig};
use crate::error::{Error, Result};
use crate::fork_choice::{main_tip, next_block_template, referring_block_on, CheckpointView, Rule};
use crate::ledger::AggregateLedger;
use crate::parallel::{pc_build_ledger, PcCertificate, PcService};

pub use adversary::{Actions, Adversary};
pub use config::{SimConfig, Strategy, Variant};
pub use log::{Carried, Event, EventLog};
pub use network::{CertMessage, Message, Network};
pub use party::{Adoption, LocalTrees, Party};

/// Everything a finished run leaves behind.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub config: SimConfig,
    pub log: EventLog,
    /// Bootstrap first, closing certificate last.
    pub certificates: Vec<PcCertificate>,
    /// Referring block of each certificate on the final main chain.
    pub referring: BTreeMap<u64, BlockId>,
    pub final_ledger: AggregateLedger,
    /// Every block mined during the run, one tree per chain.
    pub trees: Vec<BlockTree>,
    /// Committee SMR log, for BFT runs.
    pub smr_dump: Option<String>,
    /// Last round executed, drain included.
    pub end_round: u64,
}

impl SimRun {
    pub fn block(&self, id: &BlockId) -> Option<&Block> {
        self.trees.iter().find_map(|t| t.get(id))
    }

    /// Certificate contents that must agree across equivalent variants.
    pub fn certificate_trace(&self) -> Vec<(u64, BlockId, Vec<BlockId>)> {
        self.certificates
            .iter()
            .map(|c| (c.cert.index, c.base_ref(), c.references().to_vec()))
            .collect()
    }
}

/// Runs `config` and returns its event log.
pub fn run_simulation(config: &SimConfig) -> Result<EventLog> {
    Ok(simulate(config)?.log)
}

/// Runs `config` and returns the log together with the final ledger.
pub fn simulate(config: &SimConfig) -> Result<SimRun> {
    simulate_traced(config).map_err(|aborted| aborted.error)
}

/// A run that stopped on an error, with everything logged up to it.
#[derive(Debug)]
pub struct Aborted {
    pub error: Error,
    pub log: EventLog,
}

/// Like [`simulate`], but keeps the partial log when the run fails.
pub fn simulate_traced(config: &SimConfig) -> std::result::Result<SimRun, Box<Aborted>> {
    let setup = config.validate().and_then(|()| Simulation::new(config));
    match setup {
        Ok(sim) => sim.run(),
        Err(error) => Err(Box::new(Aborted {
            error,
            log: EventLog::new(),
        })),
    }
}

enum Checkpointer {
    Single { node: LocalTrees, service: CheckpointService },
    Parallel { node: LocalTrees, service: PcService },
    Committee { committee: Box<Committee>, closing_index: Option<u64> },
}

struct Simulation<'a> {
    cfg: &'a SimConfig,
    service_cfg: ServiceConfig,
    log: EventLog,
    lottery: ChaCha8Rng,
    adversary_rng: ChaCha8Rng,
    adversary_blocks: Option<Poisson<f64>>,
    network: Network,
    parties: Vec<Party>,
    adversary: Adversary,
    checkpointer: Checkpointer,
    open: Vec<Transaction>,
    tx_count: u64,
    block_count: u64,
    first_seen: HashMap<BlockId, u64>,
    confirmations: HashMap<TxId, u32>,
    included: HashSet<TxId>,
    /// Stable block order agreed so far; every party must extend it.
    canon: Vec<BlockId>,
    issued: Vec<PcCertificate>,
    closed: bool,
}

impl<'a> Simulation<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        let service_cfg = cfg.service_config();
        let hooks = cfg.variant == Variant::AdvocateHooks;
        let genesis: Vec<BlockId> = (0..cfg.chains).map(|m| Block::genesis(m).id).collect();
        let checkpointer = match cfg.variant {
            Variant::AdvocateBft => Checkpointer::Committee {
                committee: Box::new(Committee::new(
                    cfg.bft_config()?,
                    service_cfg.clone(),
                    Block::genesis(0),
                    cfg.delta,
                )?),
                closing_index: None,
            },
            Variant::AdvocatePc => Checkpointer::Parallel {
                node: LocalTrees::new(cfg.chains),
                service: PcService::new(service_cfg.clone(), &genesis)?,
            },
            _ => Checkpointer::Single {
                node: LocalTrees::new(1),
                service: CheckpointService::new(service_cfg.clone(), genesis[0])?,
            },
        };
        let mut adversary_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        adversary_rng.set_stream(1);
        let adversary_blocks = if cfg.beta > 0.0 {
            Some(Poisson::new(cfg.adversary_rate()).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        let mut log = EventLog::new();
        log.push(Event::RunStart { config: cfg.clone() });
        Ok(Simulation {
            cfg,
            log,
            lottery: ChaCha8Rng::seed_from_u64(cfg.seed),
            adversary_rng,
            adversary_blocks,
            network: Network::new(cfg.seed, cfg.delta),
            parties: (0..cfg.parties)
                .map(|p| Party::new(p, cfg.chains, service_cfg.clone()))
                .collect(),
            adversary: Adversary::new(cfg.adversary, service_cfg.clone(), hooks, cfg.seed, cfg.chains),
            checkpointer,
            service_cfg,
            open: Vec::new(),
            tx_count: 0,
            block_count: 0,
            first_seen: HashMap::new(),
            confirmations: HashMap::new(),
            included: HashSet::new(),
            canon: Vec::new(),
            issued: vec![PcCertificate::bootstrap(&genesis)],
            closed: false,
        })
    }

    fn run(mut self) -> std::result::Result<SimRun, Box<Aborted>> {
        let outcome = self.rounds().and_then(|end| self.finish(end));
        outcome.map_err(|error| {
            Box::new(Aborted {
                error,
                log: std::mem::take(&mut self.log),
            })
        })
    }

    fn rounds(&mut self) -> Result<u64> {
        for round in 1..=self.cfg.rounds {
            self.deliver(round)?;
            self.create_transactions(round);
            self.honest_lottery(round)?;
            self.adversary_step(round)?;
            self.checkpointer_step(round)?;
        }
        self.drain()
    }
}

impl Simulation<'_> {
    fn party_count(&self) -> u32 {
        self.cfg.parties
    }

    /// Network ids of the checkpointing side: the service, or every
    /// committee replica with replica 0 sharing the service's id.
    fn service_recipients(&self) -> std::ops::Range<u32> {
        let p = self.party_count();
        match &self.checkpointer {
            Checkpointer::Committee { committee, .. } => p..p + committee.config().n,
            _ => p..p + 1,
        }
    }

    fn deliver(&mut self, round: u64) -> Result<()> {
        let p = self.party_count();
        for (recipient, msg) in self.network.take_due(round) {
            let (carried, key) = match &msg {
                Message::Block(b) => (Carried::Block, b.id.0),
                Message::Cert(_) => (Carried::Certificate, msg.key()),
            };
            self.log.push(Event::Delivered {
                round,
                recipient,
                carried,
                object: key.to_hex(),
            });
            if recipient < p {
                let party = &mut self.parties[recipient as usize];
                match msg {
                    Message::Block(b) => {
                        for added in party.receive_block(b) {
                            let seen = self.first_seen.get(&added.id).copied().unwrap_or(round);
                            if round > seen + self.cfg.delta {
                                self.log.push(Event::SynchronyViolation {
                                    round,
                                    message: u64::from_le_bytes(added.id.0 .0[..8].try_into().unwrap()),
                                    detail: format!("block {} reached party {recipient} late", added.id.short()),
                                });
                            }
                        }
                    }
                    Message::Cert(c) => party.receive_cert(c),
                }
                continue;
            }
            let Message::Block(block) = msg else { continue };
            match &mut self.checkpointer {
                Checkpointer::Single { node, .. } | Checkpointer::Parallel { node, .. } => {
                    node.insert(block);
                }
                Checkpointer::Committee { committee, .. } => {
                    committee.receive_block((recipient - p) as usize, block, round);
                }
            }
        }
        for k in 0..self.parties.len() {
            if self.parties[k].has_waiting() {
                let adoption = self.parties[k].try_adopt()?;
                self.after_adoption(k, adoption, round)?;
            }
        }
        Ok(())
    }

    fn after_adoption(&mut self, k: usize, adoption: Adoption, round: u64) -> Result<()> {
        let party = &self.parties[k];
        for index in &adoption.indices {
            self.log.push(Event::CertAdopted {
                round,
                party: party.id,
                index: *index,
            });
        }
        if adoption.blocks.is_empty() {
            return Ok(());
        }
        let order = party.stable_blocks();
        let fresh = order.len() - adoption.blocks.len();
        for (pos, placed) in order.iter().enumerate().skip(fresh) {
            match self.canon.get(pos) {
                Some(agreed) if agreed != placed => {
                    return Err(Error::SafetyViolation {
                        round,
                        detail: format!(
                            "party {} places {} at stable position {pos}, others placed {}",
                            party.id,
                            placed.short(),
                            agreed.short()
                        ),
                    });
                }
                Some(_) => {}
                None => self.canon.push(*placed),
            }
        }
        self.log.push(Event::StablePrefix {
            round,
            party: party.id,
            blocks: order.len() as u64,
            txs: party.stable_ledger().len() as u64,
        });
        let everyone = self.party_count();
        let mut done = HashSet::new();
        for entry in adoption.entries.iter().filter(|e| e.origin == Origin::Honest) {
            let count = self.confirmations.entry(entry.tx).or_insert(0);
            *count += 1;
            if *count == everyone {
                done.insert(entry.tx);
                self.log.push(Event::TxConfirmed { round, tx: entry.tx });
            }
        }
        if !done.is_empty() {
            self.open.retain(|t| !done.contains(&t.id));
        }
        Ok(())
    }

    fn create_transactions(&mut self, round: u64) {
        let draw: f64 = self.lottery.random();
        let rate = self.cfg.tx_rate;
        let count = rate.floor() as u64 + u64::from(draw < rate.fract());
        for _ in 0..count {
            self.tx_count += 1;
            let tx = Transaction::mint(round, Origin::Honest, self.tx_count);
            self.log.push(Event::TxCreated { round, tx: tx.id });
            self.open.push(tx);
        }
    }

    fn honest_lottery(&mut self, round: u64) -> Result<()> {
        let draw: f64 = self.lottery.random();
        let winner = self.lottery.random_range(0..self.party_count()) as usize;
        let chain = self.lottery.random_range(0..self.cfg.chains);
        if draw < self.cfg.h {
            self.mine_honest(winner, chain, round, false)?;
        }
        Ok(())
    }

    fn mine_honest(&mut self, winner: usize, chain: u32, round: u64, drain: bool) -> Result<()> {
        let party = &self.parties[winner];
        self.block_count += 1;
        let nonce = self.nonce(b"honest", self.block_count);
        let mut mempool = if drain { Vec::new() } else { party.mempool(&self.open)? };
        if let Some(cap) = self.cfg.block_capacity {
            sample_txs(&mut mempool, cap as usize, nonce);
        }
        let ledger_view = party.live_ledger_len()?;
        let view = party.latest().view(chain, &self.service_cfg)?;
        let hooks = self.cfg.variant == Variant::AdvocateHooks;
        let template = next_block_template(party.local().tree(chain), &view, &mempool, hooks)?;
        let parent_depth = party.local().tree(chain).depth(&template.parent).unwrap_or(0);
        let mut nb = NewBlock::child_of(template.parent, Origin::Honest, round, nonce)
            .on_chain(chain)
            .with_txs(template.txs);
        if let Some(cert) = template.embedded_cert {
            nb = nb.with_cert(cert);
        }
        if let Some(hook) = template.hook {
            nb = nb.with_hook(hook);
        }
        let block = Arc::new(nb.seal());
        self.parties[winner].receive_block(Arc::clone(&block));
        self.log.push(Event::BlockMined {
            round,
            block: block.id,
            miner: Origin::Honest,
            chain,
            parent: block.parent,
            depth: parent_depth + 1,
            txs: block.txs.len() as u32,
            ledger_view,
            withheld: false,
            drain,
        });
        if let Some(index) = block.cert_index() {
            self.log.push(Event::CertEmbedded {
                round,
                index,
                block: block.id,
            });
        }
        for tx in &block.txs {
            if self.included.insert(tx.id) {
                self.log.push(Event::TxIncluded {
                    round,
                    tx: tx.id,
                    block: block.id,
                });
            }
        }
        self.adversary.observe_block(&block);
        self.first_seen.insert(block.id, round);
        let others = (0..self.party_count()).filter(|&q| q as usize != winner);
        let recipients: Vec<u32> = others.chain(self.service_recipients()).collect();
        self.network.broadcast(round, recipients, &Message::Block(block));
        Ok(())
    }

    fn nonce(&self, domain: &[u8], counter: u64) -> u64 {
        let mut buf = domain.to_vec();
        buf.extend_from_slice(&self.cfg.seed.to_le_bytes());
        buf.extend_from_slice(&counter.to_le_bytes());
        u64::from_le_bytes(Digest::of(&buf).0[..8].try_into().unwrap())
    }

    fn adversary_step(&mut self, round: u64) -> Result<()> {
        let Some(dist) = &self.adversary_blocks else {
            return Ok(());
        };
        let count = dist.sample(&mut self.adversary_rng) as u32;
        let chains: Vec<u32> = (0..count)
            .map(|_| self.adversary_rng.random_range(0..self.cfg.chains))
            .collect();
        let actions = self.adversary.act(round, count, &chains, &self.open)?;
        for (block, withheld) in &actions.mined {
            self.log.push(Event::BlockMined {
                round,
                block: block.id,
                miner: Origin::Adversarial,
                chain: block.chain_id,
                parent: block.parent,
                depth: self.adversary.trees()[block.chain_id as usize].depth(&block.id).unwrap_or(0),
                txs: block.txs.len() as u32,
                ledger_view: 0,
                withheld: *withheld,
                drain: false,
            });
            if let Some(index) = block.cert_index() {
                self.log.push(Event::CertEmbedded {
                    round,
                    index,
                    block: block.id,
                });
            }
            if !withheld {
                self.publish_block(round, Arc::clone(block));
            }
        }
        for block in actions.released {
            self.log.push(Event::BlockReleased { round, block: block.id });
            self.publish_block(round, block);
        }
        Ok(())
    }

    fn publish_block(&mut self, round: u64, block: Arc<Block>) {
        self.first_seen.entry(block.id).or_insert(round);
        let recipients: Vec<u32> = (0..self.party_count()).chain(self.service_recipients()).collect();
        self.network.broadcast(round, recipients, &Message::Block(block));
    }

    fn checkpointer_step(&mut self, round: u64) -> Result<()> {
        let mut out = Vec::new();
        match &mut self.checkpointer {
            Checkpointer::Single { node, service } => {
                if let Some(c) = service.poll(node.tree(0), round)? {
                    out.push((PcCertificate::single(c), false));
                }
            }
            Checkpointer::Parallel { node, service } => {
                if let Some(pc) = service.poll(node.trees(), round)? {
                    out.push((pc, false));
                }
            }
            Checkpointer::Committee { committee, closing_index } => {
                for c in committee.step(round)? {
                    let closing = *closing_index == Some(c.index);
                    out.push((PcCertificate::single(c), closing));
                }
            }
        }
        for (pc, closing) in out {
            self.publish_cert(round, pc, closing);
        }
        Ok(())
    }

    fn publish_cert(&mut self, round: u64, pc: PcCertificate, closing: bool) {
        self.log.push(Event::CertIssued {
            round,
            index: pc.cert.index,
            block: pc.base_ref(),
            references: pc.references().len() as u32,
            tips: pc.tips.clone(),
            closing,
        });
        self.closed |= closing;
        self.adversary.observe_cert(&pc);
        self.issued.push(pc.clone());
        let msg = Message::Cert(Arc::new(CertMessage { pc, closing }));
        self.network.broadcast(round, 0..self.party_count(), &msg);
    }
}

impl Simulation<'_> {
    /// Releases withheld blocks, lets the network settle and issues the
    /// closing certificate. Returns the last round executed.
    fn drain(&mut self) -> Result<u64> {
        let limit = self.cfg.rounds + 100 * (self.cfg.e + self.cfg.delta + self.cfg.effective_delta_bft() + self.cfg.service_delay) + 1000;
        let mut round = self.cfg.rounds;
        loop {
            round += 1;
            if round > limit {
                return Err(Error::Config(format!("run did not settle by round {limit}")));
            }
            self.deliver(round)?;
            if round == self.cfg.rounds + 1 {
                for block in self.adversary.release_all() {
                    self.log.push(Event::BlockReleased { round, block: block.id });
                    self.publish_block(round, block);
                }
            }
            self.checkpointer_step(round)?;
            if self.closed {
                if self.network.is_idle() && self.parties.iter().all(Party::is_closed) {
                    break;
                }
                continue;
            }
            if !self.network.is_idle() || self.checkpointer_busy() {
                continue;
            }
            match self.closable_tip()? {
                Some(tip) => self.close(tip, round)?,
                None => {
                    let winner = self.lottery.random_range(0..self.party_count()) as usize;
                    self.mine_honest(winner, 0, round, true)?;
                }
            }
        }
        if let Checkpointer::Committee { committee, .. } = &self.checkpointer {
            for message in committee.synchrony_violations() {
                self.log.push(Event::SynchronyViolation {
                    round,
                    message,
                    detail: "committee receipt outside the delivery bound".into(),
                });
            }
        }
        Ok(round)
    }

    fn checkpointer_busy(&self) -> bool {
        match &self.checkpointer {
            Checkpointer::Single { service, .. } => service.has_pending(),
            Checkpointer::Parallel { service, .. } => service.has_pending(),
            Checkpointer::Committee { committee, .. } => {
                committee.has_pending_checkpoint()
                    || committee.in_flight() > 0
                    || committee.smr().finalized_upto() < committee.smr().entries().len()
            }
        }
    }

    /// The checkpointing side's main tip, if a closing certificate over it
    /// would leave every earlier certificate with a referring block.
    fn closable_tip(&self) -> Result<Option<BlockId>> {
        let (tree, latest) = match &self.checkpointer {
            Checkpointer::Single { node, service } => (node.tree(0), service.last_cert()),
            Checkpointer::Parallel { node, service } => (node.tree(0), &service.last().cert),
            Checkpointer::Committee { committee, .. } => (committee.tree(), committee.last_checkpoint()),
        };
        let view = CheckpointView::new(latest, self.cfg.c, self.cfg.e, self.service_cfg.rule)?;
        let tip = main_tip(tree, &view)?;
        if tip == view.anchor || !tree.is_ancestor(&view.anchor, &tip) {
            return Ok(None);
        }
        let referred = self.service_cfg.rule == Rule::Nakamoto
            || latest.is_bootstrap()
            || referring_block_on(tree, &view, &tip)?.is_some();
        Ok(referred.then_some(tip))
    }

    fn close(&mut self, tip: BlockId, round: u64) -> Result<()> {
        match &mut self.checkpointer {
            Checkpointer::Single { node, service } => {
                let c = service.close(node.tree(0), tip, round)?;
                self.publish_cert(round, PcCertificate::single(c), true);
            }
            Checkpointer::Parallel { node, service } => {
                let pc = service.close(node.trees(), tip, round)?;
                self.publish_cert(round, pc, true);
            }
            Checkpointer::Committee { committee, closing_index } => {
                committee.close(tip, round)?;
                *closing_index = Some(committee.last_checkpoint().index);
                self.checkpointer_step(round)?;
            }
        }
        Ok(())
    }

    fn finish(&mut self, end_round: u64) -> Result<SimRun> {
        let trees = self.adversary.trees().to_vec();
        let certificates = std::mem::take(&mut self.issued);
        let last = certificates.last().expect("bootstrap present");
        let final_tip = last.base_ref();
        let mut referring = BTreeMap::new();
        for pc in &certificates {
            let r = if pc.cert.index == last.cert.index
                || pc.cert.is_bootstrap()
                || self.service_cfg.rule == Rule::Nakamoto
            {
                pc.base_ref()
            } else {
                referring_block_on(&trees[0], &pc.view(0, &self.service_cfg)?, &final_tip)?
                    .ok_or(Error::MissingReferringBlock { index: pc.cert.index })?
            };
            referring.insert(pc.cert.index, r);
        }
        let final_ledger = pc_build_ledger(&trees, &certificates, &referring)?;
        let order = final_ledger.block_order();
        if order.len() < self.canon.len() || order[..self.canon.len()] != self.canon[..] {
            return Err(Error::SafetyViolation {
                round: end_round,
                detail: "final ledger does not extend the stable prefix".into(),
            });
        }
        self.log.push(Event::RunEnd {
            round: end_round,
            certificates: certificates.len() as u64,
        });
        let smr_dump = match &self.checkpointer {
            Checkpointer::Committee { committee, .. } => Some(committee.smr().dump()),
            _ => None,
        };
        Ok(SimRun {
            config: self.cfg.clone(),
            log: std::mem::take(&mut self.log),
            certificates,
            referring,
            final_ledger,
            trees,
            smr_dump,
            end_round,
        })
    }
}

/// Keeps `cap` transactions chosen by a per-block hash, in arrival order.
fn sample_txs(pool: &mut Vec<Transaction>, cap: usize, nonce: u64) {
    if pool.len() <= cap {
        return;
    }
    let key = |t: &Transaction| {
        let mut buf = nonce.to_le_bytes().to_vec();
        buf.extend_from_slice(&t.id.0 .0);
        Digest::of(&buf)
    };
    let mut keyed: Vec<(Digest, usize)> = pool.iter().enumerate().map(|(i, t)| (key(t), i)).collect();
    keyed.select_nth_unstable(cap - 1);
    let mut keep: Vec<usize> = keyed[..cap].iter().map(|&(_, i)| i).collect();
    keep.sort_unstable();
    *pool = keep.into_iter().map(|i| pool[i].clone()).collect();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(beta: f64, variant: Variant) -> SimConfig {
        SimConfig {
            beta,
            variant,
            rounds: 200,
            ..SimConfig::default()
        }
    }

    #[test]
    fn adversary_free_run_is_a_single_chain() {
        let run = simulate(&cfg(0.0, Variant::Advocate)).unwrap();
        let blocks = run.trees[0].len();
        assert_eq!(run.final_ledger.block_order().len(), blocks);
        let mined = run.trees[0].blocks().filter(|b| !b.is_genesis()).count();
        assert_eq!(run.trees[0].leaves().len(), 1);
        assert!(mined > 50);
    }

    #[test]
    fn capped_blocks_sample_distinct_subsets() {
        let pool: Vec<Transaction> = (0..50).map(|i| Transaction::mint(i, Origin::Honest, 1)).collect();
        let mut a = pool.clone();
        let mut b = pool.clone();
        sample_txs(&mut a, 5, 1);
        sample_txs(&mut b, 5, 2);
        assert_eq!(a.len(), 5);
        assert!(a.windows(2).all(|w| w[0].created_round <= w[1].created_round));
        assert_ne!(a, b);
        let run = simulate(&SimConfig {
            block_capacity: Some(2),
            tx_rate: 3.0,
            ..cfg(0.0, Variant::Advocate)
        })
        .unwrap();
        assert!(run.trees[0].blocks().all(|b| b.txs.len() <= 2));
    }

    #[test]
    fn same_seed_same_log() {
        let c = cfg(0.5, Variant::Advocate);
        assert_eq!(run_simulation(&c).unwrap().to_ndjson(), run_simulation(&c).unwrap().to_ndjson());
    }

    #[test]
    fn every_variant_completes() {
        for v in [Variant::Advocate, Variant::NakamotoCp, Variant::StochasticCp] {
            simulate(&cfg(0.5, v)).unwrap();
        }
        let hooks = SimConfig {
            hook_t: Some(2),
            ..cfg(0.5, Variant::AdvocateHooks)
        };
        simulate(&hooks).unwrap();
        let bft = SimConfig {
            delta_bft: 2,
            c: 4,
            ..cfg(0.5, Variant::AdvocateBft)
        };
        simulate(&bft).unwrap();
        let pc = SimConfig {
            chains: 3,
            adversary: Strategy::Censorship,
            ..cfg(0.5, Variant::AdvocatePc)
        };
        simulate(&pc).unwrap();
    }
}
