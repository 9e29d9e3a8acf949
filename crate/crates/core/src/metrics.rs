//! Run metrics (goodput, latency, wastage, chain quality) and the
//! closed-form bounds they are checked against.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::chain::{BlockId, Origin, TxId};
use crate::error::{Error, Result};
use crate::ledger::AggregateLedger;
use crate::sim::{Event, EventLog, SimConfig, SimRun};

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

/// Rounds within which every honest transaction confirms: ⌈2/h⌉·e.
pub fn bound_liveness(h: f64, e: u64) -> Result<u64> {
    if !(h > 0.0 && h <= 1.0) || e == 0 {
        return Err(domain(format!("liveness bound needs 0 < h <= 1 and e >= 1, got h={h} e={e}")));
    }
    Ok((2.0 / h).ceil() as u64 * e)
}

/// Depth below which a block is final: e − c.
pub fn bound_safety_depth(e: u64, c: u64) -> Result<u64> {
    if c == 0 || e <= c {
        return Err(domain(format!("safety depth needs e > c >= 1, got e={e} c={c}")));
    }
    Ok(e - c)
}

/// Least honest fraction of any window spanning `t` checkpoints in hooks
/// mode.
pub fn bound_short_term_cq(beta: f64, t: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) || t < 2 {
        return Err(domain(format!("short-term chain quality needs 0 <= beta < 1 and t >= 2, got beta={beta} t={t}")));
    }
    let t = t as f64;
    Ok((1.0 - beta) * (t - 1.0) / (t + beta + t * beta - 1.0))
}

/// Expected distance, in ledger blocks, between where an honest block
/// lands and the ledger length its miner saw. `None` for `t` is plain
/// operation, which has no bound.
pub fn bound_inclusion_gap(beta: f64, t: Option<u64>, e: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) || e == 0 || t == Some(0) {
        return Err(domain(format!("inclusion gap needs 0 <= beta < 1, t >= 1, e >= 1, got beta={beta} t={t:?} e={e}")));
    }
    let Some(t) = t else {
        return Ok(f64::INFINITY);
    };
    Ok((beta * t as f64 - beta + 1.0) * e as f64 / (1.0 - beta))
}

fn scheduled_rounds(log: &EventLog) -> Result<u64> {
    log.config()
        .map(|c| c.rounds)
        .ok_or_else(|| domain("event log has no run_start record".into()))
}

fn confirmed_by(log: &EventLog, round: u64) -> usize {
    log.events()
        .iter()
        .filter(|e| matches!(e, Event::TxConfirmed { round: r, .. } if *r <= round))
        .count()
}

/// Confirmed honest transactions per round relative to an adversary-free
/// run of the same configuration, capped at one.
pub fn fractional_goodput(log: &EventLog, reference: &EventLog) -> Result<f64> {
    let (run, base) = match (log.config(), reference.config()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::MismatchedConfigs("missing run_start record".into())),
    };
    if base.beta != 0.0 {
        return Err(Error::MismatchedConfigs(format!("reference has beta={}", base.beta)));
    }
    let normalized = SimConfig {
        beta: 0.0,
        adversary: base.adversary,
        ..run.clone()
    };
    if &normalized != base {
        return Err(Error::MismatchedConfigs(
            "reference differs in more than beta and adversary".into(),
        ));
    }
    let optimal = confirmed_by(reference, base.rounds);
    if optimal == 0 {
        return Err(domain("reference run confirmed no transactions".into()));
    }
    Ok((confirmed_by(log, run.rounds) as f64 / optimal as f64).min(1.0))
}

/// Inclusion latency in units of the mean block interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionLatency {
    /// Mean over transactions confirmed within the scheduled rounds.
    pub mean: f64,
    pub confirmed: usize,
    /// Some transaction stayed unconfirmed for at least two epochs' worth
    /// of honest mining.
    pub unconfirmed: bool,
}

impl InclusionLatency {
    /// The reported figure: infinite once any transaction is stuck.
    pub fn value(&self) -> f64 {
        if self.unconfirmed || self.confirmed == 0 {
            f64::INFINITY
        } else {
            self.mean
        }
    }
}

/// Mean block interval: scheduled rounds over blocks of the final ledger
/// mined within them.
pub fn mean_block_interval(log: &EventLog, ledger: &AggregateLedger) -> Result<f64> {
    let rounds = scheduled_rounds(log)?;
    let blocks = log
        .events()
        .iter()
        .filter(|e| matches!(e, Event::BlockMined { block, drain: false, .. } if ledger.block_position(block).is_some()))
        .count();
    if blocks == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(rounds as f64 / blocks as f64)
}

pub fn inclusion_latency(log: &EventLog, ledger: &AggregateLedger) -> Result<InclusionLatency> {
    let config = log.config().ok_or_else(|| domain("event log has no run_start record".into()))?;
    let interval = mean_block_interval(log, ledger)?;
    let patience = bound_liveness(config.h, config.e)?;
    let (created, confirmed) = tx_rounds(log);
    let mut total = 0.0;
    let mut count = 0;
    let mut stuck = false;
    for (tx, born) in &created {
        match confirmed.get(tx) {
            Some(&done) if done <= config.rounds => {
                total += (done - born) as f64;
                count += 1;
            }
            _ => stuck |= config.rounds - born >= patience,
        }
    }
    let mean = if count == 0 { f64::INFINITY } else { total / count as f64 / interval };
    Ok(InclusionLatency {
        mean,
        confirmed: count,
        unconfirmed: stuck,
    })
}

fn tx_rounds(log: &EventLog) -> (Vec<(TxId, u64)>, HashMap<TxId, u64>) {
    let mut created = Vec::new();
    let mut confirmed = HashMap::new();
    for e in log.events() {
        match e {
            Event::TxCreated { round, tx } => created.push((*tx, *round)),
            Event::TxConfirmed { round, tx } => {
                confirmed.insert(*tx, *round);
            }
            _ => {}
        }
    }
    (created, confirmed)
}

/// Honest transactions that missed the liveness deadline
/// `bound_liveness(h, e) + slack`. Transactions created too late to reach
/// the deadline within the scheduled rounds are not judged.
pub fn liveness_violations(log: &EventLog, slack: u64) -> Result<Vec<TxId>> {
    let config = log.config().ok_or_else(|| domain("event log has no run_start record".into()))?;
    let deadline = bound_liveness(config.h, config.e)? + slack;
    let (created, confirmed) = tx_rounds(log);
    Ok(created
        .into_iter()
        .filter(|(tx, born)| match confirmed.get(tx) {
            Some(done) => done - born > deadline,
            None => born + deadline <= config.rounds,
        })
        .map(|(tx, _)| tx)
        .collect())
}

fn honest_blocks(log: &EventLog) -> impl Iterator<Item = (&BlockId, u64)> {
    log.events().iter().filter_map(|e| match e {
        Event::BlockMined {
            block,
            miner: Origin::Honest,
            drain: false,
            ledger_view,
            ..
        } => Some((block, *ledger_view)),
        _ => None,
    })
}

/// Share of honest blocks mined during the scheduled rounds that never
/// reached the final ledger.
pub fn honest_wastage(log: &EventLog, ledger: &AggregateLedger) -> f64 {
    let (mined, kept) = honest_blocks(log).fold((0usize, 0usize), |(m, k), (b, _)| {
        (m + 1, k + usize::from(ledger.block_position(b).is_some()))
    });
    if mined == 0 {
        0.0
    } else {
        1.0 - kept as f64 / mined as f64
    }
}

/// Honest share of the mined blocks at ledger positions in `window`
/// (whole ledger when absent). Genesis blocks do not count.
pub fn chain_quality(ledger: &AggregateLedger, log: &EventLog, window: Option<RangeInclusive<usize>>) -> Result<f64> {
    let miners: HashMap<&BlockId, Origin> = log
        .events()
        .iter()
        .filter_map(|e| match e {
            Event::BlockMined { block, miner, .. } => Some((block, *miner)),
            _ => None,
        })
        .collect();
    let order = ledger.block_order();
    let window = window.unwrap_or(0..=order.len().saturating_sub(1));
    let (honest, total) = order
        .iter()
        .enumerate()
        .filter(|(pos, _)| window.contains(pos))
        .filter_map(|(_, id)| miners.get(id))
        .fold((0usize, 0usize), |(h, t), m| (h + usize::from(*m == Origin::Honest), t + 1));
    if total == 0 {
        return Err(Error::EmptyWindow);
    }
    Ok(honest as f64 / total as f64)
}

/// Ledger windows from each checkpointed block to the one `t`
/// certificates later, both ends included. The closing certificate is
/// left out: it checkpoints the drained tail, not a scheduled epoch.
pub fn checkpoint_windows(run: &SimRun, t: u64) -> Vec<RangeInclusive<usize>> {
    let certs = &run.certificates[..run.certificates.len().saturating_sub(1)];
    let positions: Vec<Option<usize>> = certs
        .iter()
        .map(|c| run.final_ledger.block_position(&c.base_ref()))
        .collect();
    positions
        .iter()
        .zip(positions.iter().skip(t as usize))
        .filter_map(|(a, b)| Some((*a)?..=(*b)?))
        .collect()
}

/// Mean over honest blocks of final ledger position minus the ledger
/// length their miner saw, and the number of honest blocks missing from
/// the ledger.
pub fn inclusion_gap(log: &EventLog, ledger: &AggregateLedger) -> (f64, usize) {
    let mut total = 0.0;
    let mut count = 0usize;
    let mut missing = 0usize;
    for (block, seen) in honest_blocks(log) {
        match ledger.block_position(block) {
            Some(pos) => {
                total += pos as f64 - seen as f64;
                count += 1;
            }
            None => missing += 1,
        }
    }
    (if count == 0 { 0.0 } else { total / count as f64 }, missing)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fg: f64,
    pub il: f64,
    pub il_unconfirmed: bool,
    pub hw: f64,
    pub cq: f64,
    pub safety_ok: bool,
    pub liveness_bound_ok: bool,
}

impl MetricsReport {
    /// Metrics of `run`, with goodput taken against `reference` (a β = 0
    /// run of the same configuration). A run that finished has passed
    /// every stable-prefix check.
    pub fn compute(run: &SimRun, reference: &SimRun) -> Result<Self> {
        let latency = inclusion_latency(&run.log, &run.final_ledger)?;
        let slack = 2 * (run.config.delta + run.config.effective_delta_bft());
        Ok(MetricsReport {
            fg: fractional_goodput(&run.log, &reference.log)?,
            il: latency.value(),
            il_unconfirmed: latency.unconfirmed,
            hw: honest_wastage(&run.log, &run.final_ledger),
            cq: chain_quality(&run.final_ledger, &run.log, None)?,
            safety_ok: true,
            liveness_bound_ok: liveness_violations(&run.log, slack)?.is_empty(),
        })
    }
}
