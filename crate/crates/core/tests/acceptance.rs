//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with a plain `main` so every verdict is printed, including the
//! passing ones. Simulations are cached by configuration and computed in
//! parallel; the process exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest as _, Sha256};

use advocate_core::chain::{NewBlock, Origin};
use advocate_core::experiment::{run_matrix, ExperimentMatrix, GoodputLoad, Grid};
use advocate_core::metrics::{
    bound_inclusion_gap, bound_liveness, bound_short_term_cq, chain_quality, checkpoint_windows, fractional_goodput,
    honest_wastage,
    inclusion_gap, inclusion_latency, liveness_violations,
};
use advocate_core::sim::{run_simulation, simulate, Event, SimConfig, SimRun, Strategy, Variant};
use advocate_core::{canonical_block_order, Block, BlockId, BlockTree};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const BETAS: [f64; 3] = [0.5, 0.67, 0.9];
const LOAD: GoodputLoad = GoodputLoad {
    block_capacity: 4,
    tx_rate: 4.0,
};

/// Rounds giving at least 50 epochs at honest rate 0.5 even with no
/// adversarial blocks.
fn rounds_for(e: u64) -> u64 {
    120 * e
}

fn config(variant: Variant, beta: f64, e: u64, seed: u64) -> SimConfig {
    SimConfig {
        variant,
        beta,
        e,
        seed,
        rounds: rounds_for(e),
        hook_t: (variant == Variant::AdvocateHooks).then_some(2),
        ..SimConfig::default()
    }
}

/// BFT run with the window widened to cover the finalization delay.
fn bft(beta: f64, delta_bft: u64, e: u64, seed: u64) -> SimConfig {
    SimConfig {
        delta_bft,
        c: 2 + delta_bft,
        ..config(Variant::AdvocateBft, beta, e, seed)
    }
}

#[derive(Default)]
struct Runs {
    cache: Mutex<HashMap<String, Arc<SimRun>>>,
}

impl Runs {
    fn key(cfg: &SimConfig) -> String {
        serde_json::to_string(cfg).expect("config serializes")
    }

    /// Simulates every missing configuration in parallel and returns the
    /// runs in input order. A failed run (safety included) panics with
    /// its configuration.
    fn get(&self, cfgs: &[SimConfig]) -> Vec<Arc<SimRun>> {
        let missing: Vec<&SimConfig> = {
            let cache = self.cache.lock().unwrap();
            cfgs.iter().filter(|c| !cache.contains_key(&Self::key(c))).unique_by(|c| Self::key(c)).collect()
        };
        let fresh: Vec<(String, Arc<SimRun>)> = missing
            .par_iter()
            .map(|c| {
                let run = simulate(c).unwrap_or_else(|e| panic!("{e} in {}", Self::key(c)));
                (Self::key(c), Arc::new(run))
            })
            .collect();
        let mut cache = self.cache.lock().unwrap();
        cache.extend(fresh);
        cfgs.iter().map(|c| Arc::clone(&cache[&Self::key(c)])).collect()
    }

    fn count(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn hw(run: &SimRun) -> f64 {
    honest_wastage(&run.log, &run.final_ledger)
}

fn cq(run: &SimRun) -> f64 {
    chain_quality(&run.final_ledger, &run.log, None).unwrap()
}

fn slack(cfg: &SimConfig) -> u64 {
    2 * (cfg.delta + cfg.effective_delta_bft())
}

fn violations(run: &SimRun) -> usize {
    liveness_violations(&run.log, slack(&run.config)).unwrap().len()
}

/// Goodput under the saturated load, from cached runs.
fn fg(runs: &Runs, cfg: &SimConfig) -> f64 {
    let loaded = SimConfig {
        block_capacity: Some(LOAD.block_capacity),
        tx_rate: LOAD.tx_rate,
        ..cfg.clone()
    };
    let reference = SimConfig { beta: 0.0, ..loaded.clone() };
    let pair = runs.get(&[loaded, reference]);
    fractional_goodput(&pair[0].log, &pair[1].log).unwrap()
}

fn il(run: &SimRun) -> f64 {
    inclusion_latency(&run.log, &run.final_ledger).unwrap().value()
}

fn grid(make: impl Fn(f64, u64) -> SimConfig) -> Vec<SimConfig> {
    BETAS.iter().flat_map(|&b| SEEDS.map(|s| make(b, s))).collect()
}

fn check_cq(runs: &Runs, cfgs: &[SimConfig]) -> Verdict {
    let all = runs.get(cfgs);
    let worst = all.iter().map(|r| (cq(r) - (1.0 - r.config.beta)).abs()).fold(0.0, f64::max);
    verdict(worst <= 0.05, format!("{} runs, max |cq - (1 - beta)| = {worst:.4}", all.len()))
}

fn check_hw(runs: &Runs, cfgs: &[SimConfig]) -> Verdict {
    let all = runs.get(cfgs);
    let wasted = all.iter().filter(|r| hw(r) != 0.0).count();
    let worst = all.iter().map(|r| hw(r)).fold(0.0, f64::max);
    verdict(wasted == 0, format!("{} runs, {wasted} with hw > 0, max hw {worst:.4}", all.len()))
}

fn check_liveness(runs: &Runs, cfgs: &[SimConfig]) -> Verdict {
    let all = runs.get(cfgs);
    let per_run: Vec<usize> = all.iter().map(|r| violations(r)).collect();
    let total: usize = per_run.iter().sum();
    let worst_excess = all
        .iter()
        .flat_map(|r| {
            let deadline = bound_liveness(r.config.h, r.config.e).unwrap() + slack(&r.config);
            confirmation_latencies(r).into_iter().map(move |l| l as i64 - deadline as i64)
        })
        .max()
        .unwrap_or(0);
    verdict(
        total == 0,
        format!(
            "{} runs, {total} late transactions ({} runs affected), worst overshoot {worst_excess} rounds",
            all.len(),
            per_run.iter().filter(|&&v| v > 0).count()
        ),
    )
}

/// Rounds from creation to confirmation, per confirmed transaction.
fn confirmation_latencies(run: &SimRun) -> Vec<u64> {
    let mut created = HashMap::new();
    let mut out = Vec::new();
    for e in run.log.events() {
        match e {
            Event::TxCreated { round, tx } => {
                created.insert(*tx, *round);
            }
            Event::TxConfirmed { round, tx } => out.extend(created.get(tx).map(|c| round - c)),
            _ => {}
        }
    }
    out
}

/// The simulator checks the stable prefix and every checkpointed uncle
/// position on each adoption and aborts on a conflict, so a run that
/// finished is already conflict-free. On top of that, each certificate's
/// references must appear in the final ledger in certificate order.
fn check_safety(runs: &Runs, cfgs: &[SimConfig]) -> Verdict {
    let all = runs.get(cfgs);
    let misplaced: usize = all
        .iter()
        .map(|r| {
            r.certificates
                .iter()
                .filter(|pc| {
                    let pos: Vec<Option<usize>> =
                        pc.references().iter().map(|id| r.final_ledger.block_position(id)).collect();
                    pos.iter().any(Option::is_none) || !pos.windows(2).all(|w| w[0] < w[1])
                })
                .count()
        })
        .sum();
    verdict(
        misplaced == 0,
        format!("{} runs finished without a conflict, {misplaced} misplaced reference sets", all.len()),
    )
}

fn advocate(e: u64) -> Vec<SimConfig> {
    grid(|b, s| config(Variant::Advocate, b, e, s))
}

fn c1_optimal_chain_quality(runs: &Runs) -> Verdict {
    check_cq(runs, &advocate(5))
}

fn c2_zero_wastage(runs: &Runs) -> Verdict {
    check_hw(runs, &[advocate(5), advocate(10)].concat())
}

fn c3_liveness_bound(runs: &Runs) -> Verdict {
    check_liveness(runs, &[advocate(5), advocate(10)].concat())
}

fn c4_safety(runs: &Runs) -> Verdict {
    let mut cfgs: Vec<SimConfig> = [Variant::Advocate, Variant::AdvocateHooks, Variant::StochasticCp, Variant::NakamotoCp]
        .into_iter()
        .flat_map(|v| grid(move |b, s| config(v, b, 5, s)))
        .collect();
    cfgs.extend(grid(|b, s| bft(b, 2, 5, s)));
    cfgs.extend(grid(|b, s| SimConfig { chains: 3, ..config(Variant::AdvocatePc, b, 5, s) }));
    check_safety(runs, &cfgs)
}

fn c5_baseline_ordering(runs: &Runs) -> Verdict {
    let variants = [Variant::Advocate, Variant::StochasticCp, Variant::NakamotoCp];
    let mut ordered = 0;
    let mut rows = Vec::new();
    for seed in SEEDS {
        let [a, s, n] = variants.map(|v| fg(runs, &config(v, 0.5, 5, seed)));
        ordered += usize::from(a > s && s > n);
        rows.push(format!("{a:.3}/{s:.3}/{n:.3}"));
    }
    // Baselines must collapse completely at beta 0.9; Advocate must not.
    let mut base_fg: f64 = 0.0;
    let mut base_hw = f64::INFINITY;
    let mut base_finite_il = 0;
    let mut adv_fg = f64::INFINITY;
    let mut adv_hw: f64 = 0.0;
    for seed in SEEDS {
        for v in [Variant::StochasticCp, Variant::NakamotoCp] {
            let cfg = config(v, 0.9, 5, seed);
            let run = &runs.get(std::slice::from_ref(&cfg))[0];
            base_fg = base_fg.max(fg(runs, &cfg));
            base_hw = base_hw.min(hw(run));
            base_finite_il += usize::from(il(run).is_finite());
        }
        let cfg = config(Variant::Advocate, 0.9, 5, seed);
        let run = &runs.get(std::slice::from_ref(&cfg))[0];
        adv_fg = adv_fg.min(fg(runs, &cfg));
        adv_hw = adv_hw.max(hw(run));
    }
    let collapsed = base_fg == 0.0 && base_hw == 1.0 && base_finite_il == 0 && adv_fg > 0.0 && adv_hw == 0.0;
    verdict(
        ordered == SEEDS.len() && collapsed,
        format!(
            "beta 0.5 fg adv/stoch/nak per seed [{}]: {ordered}/{} ordered; beta 0.9 baselines: max fg {base_fg}, \
             min hw {base_hw:.4}, {base_finite_il} finite il; advocate: min fg {adv_fg:.3}, max hw {adv_hw}",
            rows.join(", "),
            SEEDS.len(),
        ),
    )
}

fn c6_epoch_scaling(runs: &Runs) -> Verdict {
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut worst_drop = f64::NEG_INFINITY;
    for seed in SEEDS {
        let short = config(Variant::Advocate, 0.5, 5, seed);
        let long = config(Variant::Advocate, 0.5, 10, seed);
        let pair = runs.get(&[short.clone(), long.clone()]);
        let ratio = il(&pair[1]) / il(&pair[0]);
        let drop = fg(runs, &short) - fg(runs, &long);
        ok &= (1.5..=2.5).contains(&ratio) && drop < 0.15;
        worst_drop = worst_drop.max(drop);
        ratios.push(format!("{ratio:.2}"));
    }
    verdict(
        ok,
        format!("beta 0.5 il(e=10)/il(e=5) per seed [{}], worst fg drop {worst_drop:.4}", ratios.join(", ")),
    )
}

fn short_term_cq(beta: f64, t: u64) -> f64 {
    let t = t as f64;
    (1.0 - beta) * (t - 1.0) / (t + beta + t * beta - 1.0)
}

fn hooks(beta: f64, t: u64, seed: u64) -> SimConfig {
    SimConfig {
        hook_t: Some(t),
        ..config(Variant::AdvocateHooks, beta, 5, seed)
    }
}

fn c7_hooks_short_term_cq(runs: &Runs) -> Verdict {
    let spots_ok = [(0.0, 2, 1.0), (0.5, 3, 0.25), (0.9, 2, short_term_cq(0.9, 2))]
        .iter()
        .all(|&(b, t, want)| (bound_short_term_cq(b, t).unwrap() - want).abs() < 1e-12)
        && (short_term_cq(0.9, 2) - 0.1 / 3.7).abs() < 1e-12;
    let mut windows = 0;
    let mut below = 0;
    let mut cells = Vec::new();
    for t in [2, 3] {
        for beta in BETAS {
            let bound = bound_short_term_cq(beta, t).unwrap();
            let all = runs.get(&SEEDS.map(|s| hooks(beta, t, s)));
            let mut worst = f64::INFINITY;
            for run in &all {
                for w in checkpoint_windows(run, t) {
                    let q = chain_quality(&run.final_ledger, &run.log, Some(w)).unwrap();
                    windows += 1;
                    below += usize::from(q < bound);
                    worst = worst.min(q);
                }
            }
            cells.push(format!("t={t} b={beta}: min {worst:.3} vs {bound:.3}"));
        }
    }
    verdict(
        spots_ok && below == 0,
        format!(
            "spot values {}; {below}/{windows} windows below the bound [{}]",
            if spots_ok { "match" } else { "MISMATCH" },
            cells.join("; ")
        ),
    )
}

fn c8_inclusion_gap(runs: &Runs) -> Verdict {
    let gap = |beta: f64, t: f64, e: f64| (beta * t - beta + 1.0) * e / (1.0 - beta);
    let spots_ok = bound_inclusion_gap(0.0, Some(2), 5).unwrap() == 5.0
        && bound_inclusion_gap(0.0, Some(3), 10).unwrap() == 10.0
        && bound_inclusion_gap(0.5, Some(2), 5).unwrap() == 15.0
        && bound_inclusion_gap(0.5, Some(2), 5).unwrap() == gap(0.5, 2.0, 5.0);
    let mut ok = spots_ok;
    let mut cells = Vec::new();
    for t in [2, 3] {
        for beta in BETAS {
            let bound = bound_inclusion_gap(beta, Some(t), 5).unwrap();
            let all = runs.get(&SEEDS.map(|s| hooks(beta, t, s)));
            let worst = all.iter().map(|r| inclusion_gap(&r.log, &r.final_ledger).0).fold(0.0, f64::max);
            ok &= worst <= 1.1 * bound;
            cells.push(format!("t={t} b={beta}: {worst:.2} vs {bound:.2}"));
        }
    }
    verdict(
        ok,
        format!(
            "spot values {}; worst mean gap per cell [{}]",
            if spots_ok { "match" } else { "MISMATCH" },
            cells.join("; ")
        ),
    )
}

fn c9_serializability(runs: &Runs) -> Verdict {
    let cfgs = SEEDS.map(|seed| SimConfig {
        delta: 2,
        tx_rate: 1.0,
        rounds: 1200,
        ..config(Variant::Advocate, 0.0, 5, seed)
    });
    let mut placed_total = 0;
    let mut inversions = 0usize;
    let mut tail = 0;
    let mut skipped = 0;
    for run in runs.get(&cfgs) {
        let last_block = run
            .log
            .events()
            .iter()
            .filter_map(|e| match e {
                Event::BlockMined { round, drain: false, .. } => Some(*round),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let mut placed = Vec::new();
        for e in run.log.events() {
            if let Event::TxCreated { round, tx } = e {
                match run.final_ledger.position(tx) {
                    Some(pos) => placed.push((*round, pos)),
                    // Created after the last scheduled block, so no block could carry it.
                    None if *round >= last_block => tail += 1,
                    None => skipped += 1,
                }
            }
        }
        placed_total += placed.len();
        inversions += placed
            .iter()
            .tuple_combinations()
            .filter(|(a, b)| (a.0 < b.0 && a.1 > b.1) || (b.0 < a.0 && b.1 > a.1))
            .count();
    }
    verdict(
        inversions == 0 && skipped == 0 && placed_total >= 1000,
        format!(
            "{placed_total} ordered transactions over {} runs, {inversions} inverted pairs, {skipped} skipped \
             ({tail} created after the last block)",
            SEEDS.len()
        ),
    )
}

fn c10_bft_equivalence(runs: &Runs) -> Verdict {
    let plain = runs.get(&advocate(5));
    let fed = runs.get(&grid(|b, s| bft(b, 0, 5, s)));
    let equal = plain
        .iter()
        .zip(&fed)
        .filter(|(a, b)| a.certificate_trace() == b.certificate_trace())
        .count();
    let slow: Vec<SimConfig> = [5, 10].iter().flat_map(|&e| grid(move |b, s| bft(b, 2, e, s))).collect();
    let slow_e5 = grid(|b, s| bft(b, 2, 5, s));
    // Criterion 2 is pinned to delta_bft 0; at delta_bft 2 wastage is
    // reported, not required to vanish.
    let wastage = check_hw(runs, &slow).detail;
    let checks = [
        ("cq", check_cq(runs, &slow_e5)),
        ("liveness", check_liveness(runs, &slow)),
        ("safety", check_safety(runs, &slow)),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, v)| !v.pass)
        .map(|(name, v)| format!("{name}: {}", v.detail))
        .collect();
    verdict(
        equal == plain.len() && failed.is_empty(),
        format!(
            "delta_bft 0: {equal}/{} certificate traces identical; delta_bft 2, c 4: {} (wastage: {wastage})",
            plain.len(),
            if failed.is_empty() { "criteria 1, 3, 4 hold".to_string() } else { failed.join("; ") }
        ),
    )
}

fn c11_synchrony(runs: &Runs) -> Verdict {
    let cfgs: Vec<SimConfig> = [0, 2]
        .iter()
        .flat_map(|&d| [5, 10].map(|e| (d, e)))
        .flat_map(|(d, e)| grid(move |b, s| bft(b, d, e, s)))
        .collect();
    let all = runs.get(&cfgs);
    let late = all
        .iter()
        .flat_map(|r| r.log.events())
        .filter(|e| matches!(e, Event::SynchronyViolation { .. }))
        .count();
    let delivered = all
        .iter()
        .flat_map(|r| r.log.events())
        .filter(|e| matches!(e, Event::Delivered { .. }))
        .count();
    verdict(late == 0, format!("{} BFT runs, {delivered} deliveries, {late} synchrony violations", all.len()))
}

fn c12_parallel_chains(runs: &Runs) -> Verdict {
    let plain = runs.get(&advocate(5));
    let single = runs.get(&grid(|b, s| config(Variant::AdvocatePc, b, 5, s)));
    let equal = plain
        .iter()
        .zip(&single)
        .filter(|(a, b)| {
            a.certificate_trace() == b.certificate_trace() && a.final_ledger.block_order() == b.final_ledger.block_order()
        })
        .count();
    let censored = runs.get(&SEEDS.map(|seed| SimConfig {
        chains: 3,
        adversary: Strategy::Censorship,
        rounds: 900,
        ..config(Variant::AdvocatePc, 0.7, 5, seed)
    }));
    let worst_cq = censored.iter().map(|r| cq(r)).fold(f64::INFINITY, f64::min);
    let worst_hw = censored.iter().map(|r| hw(r)).fold(0.0, f64::max);
    verdict(
        equal == plain.len() && worst_cq >= 0.25 && worst_hw == 0.0,
        format!(
            "M=1: {equal}/{} runs trace-identical to plain; M=3 beta 0.7 censorship: min cq {worst_cq:.3}, max hw {worst_hw}",
            plain.len()
        ),
    )
}

/// Lexicographically smallest permutation with every parent inside the
/// set placed before its child.
fn order_oracle(set: &[BlockId], tree: &BlockTree) -> Vec<BlockId> {
    set.iter()
        .copied()
        .permutations(set.len())
        .filter(|perm| {
            perm.iter().enumerate().all(|(i, id)| {
                let block = tree.get(id).unwrap();
                block.is_genesis() || !perm[i + 1..].contains(&block.parent)
            })
        })
        .min()
        .unwrap_or_default()
}

fn random_tree(rng: &mut ChaCha8Rng, size: usize) -> (BlockTree, Vec<BlockId>) {
    let mut tree = BlockTree::new(Block::genesis(0));
    let mut ids = vec![tree.genesis()];
    for nonce in 1..size as u64 {
        let parent = ids[rng.random_range(0..ids.len())];
        let origin = if rng.random_bool(0.5) { Origin::Honest } else { Origin::Adversarial };
        let block = NewBlock::child_of(parent, origin, nonce, rng.random()).seal();
        ids.push(block.id);
        tree.insert(block).unwrap();
    }
    (tree, ids)
}

/// `H(0x00 ‖ id)` leaves, `H(0x01 ‖ l ‖ r)` nodes, odd levels repeat the
/// last node, `H("")` for no leaves.
fn merkle_oracle(ids: &[BlockId]) -> [u8; 32] {
    let sha = |parts: &[&[u8]]| -> [u8; 32] {
        let mut h = Sha256::new();
        parts.iter().for_each(|p| h.update(p));
        h.finalize().into()
    };
    if ids.is_empty() {
        return sha(&[b""]);
    }
    let mut level: Vec<[u8; 32]> = ids.iter().map(|id| sha(&[&[0x00], id.as_bytes()])).collect();
    while level.len() > 1 {
        if level.len() % 2 == 1 {
            level.push(*level.last().unwrap());
        }
        level = level.chunks(2).map(|p| sha(&[&[0x01], &p[0], &p[1]])).collect();
    }
    level[0]
}

fn c13_oracles(runs: &Runs) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut mismatched = 0;
    let mut sets = 0;
    for _ in 0..200 {
        let size = rng.random_range(1..=7);
        let (tree, ids) = random_tree(&mut rng, size);
        let subset: Vec<BlockId> = ids.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
        for set in [ids.clone(), subset] {
            sets += 1;
            if canonical_block_order(&set, &tree).unwrap() != order_oracle(&set, &tree) {
                mismatched += 1;
            }
        }
    }
    let fed = runs.get(&[grid(|b, s| bft(b, 0, 5, s)), grid(|b, s| bft(b, 2, 5, s))].concat());
    let mut roots = 0;
    let mut bad_roots = 0;
    for pc in fed.iter().flat_map(|r| &r.certificates) {
        if let Some(root) = pc.cert.merkle_root {
            roots += 1;
            bad_roots += usize::from(root.0 != merkle_oracle(pc.references()));
        }
    }
    verdict(
        mismatched == 0 && roots > 0 && bad_roots == 0,
        format!("order: {mismatched}/{sets} block sets differ from the oracle; merkle: {bad_roots}/{roots} roots differ"),
    )
}

fn tiny_matrix(output: &std::path::Path) -> ExperimentMatrix {
    ExperimentMatrix {
        output: output.to_path_buf(),
        seeds: vec![3, 4],
        grid: Grid {
            beta: vec![0.5, 0.9],
            e: vec![5],
            delta_bft: vec![0, 2],
            variant: Variant::ALL.to_vec(),
        },
        base: SimConfig {
            rounds: 300,
            ..SimConfig::default()
        },
        goodput: Some(LOAD),
        ..ExperimentMatrix::default()
    }
}

fn report_files(matrix: &ExperimentMatrix, parallel: bool, dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let report = run_matrix(matrix, parallel).unwrap();
    report
        .write(dir, 2)
        .unwrap()
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .sorted()
        .collect()
}

fn c14_determinism(_: &Runs) -> Verdict {
    let logs_equal = Variant::ALL.par_iter().all(|&v| {
        let mut cfg = config(v, 0.5, 5, 11);
        if v == Variant::AdvocatePc {
            cfg.chains = 3;
        }
        if v == Variant::AdvocateBft {
            cfg = bft(0.5, 2, 5, 11);
        }
        let a = run_simulation(&cfg).unwrap().to_ndjson();
        let b = run_simulation(&cfg).unwrap().to_ndjson();
        !a.is_empty() && a == b
    });
    let scratch = tempfile::tempdir().unwrap();
    let matrix = tiny_matrix(&scratch.path().join("unused"));
    let serial = report_files(&matrix, false, &scratch.path().join("serial"));
    let parallel = report_files(&matrix, true, &scratch.path().join("parallel"));
    let again = report_files(&matrix, true, &scratch.path().join("again"));
    let csv_equal = !serial.is_empty() && serial == parallel && parallel == again;
    verdict(
        logs_equal && csv_equal,
        format!(
            "event logs {} across repeated runs of all {} variants; {} CSV files {} across serial, parallel and repeated runs",
            if logs_equal { "byte-identical" } else { "DIFFER" },
            Variant::ALL.len(),
            serial.len(),
            if csv_equal { "byte-identical" } else { "DIFFER" }
        ),
    )
}

type Criterion = (u32, &'static str, fn(&Runs) -> Verdict);

const CRITERIA: [Criterion; 14] = [
    (1, "optimal chain quality", c1_optimal_chain_quality),
    (2, "zero honest wastage", c2_zero_wastage),
    (3, "liveness bound", c3_liveness_bound),
    (4, "safety", c4_safety),
    (5, "baseline ordering", c5_baseline_ordering),
    (6, "epoch scaling", c6_epoch_scaling),
    (7, "hooks short-term chain quality", c7_hooks_short_term_cq),
    (8, "chain inclusion gap", c8_inclusion_gap),
    (9, "optimistic serializability", c9_serializability),
    (10, "BFT equivalence", c10_bft_equivalence),
    (11, "BFT delivery synchrony", c11_synchrony),
    (12, "parallel chains", c12_parallel_chains),
    (13, "ordering and Merkle oracles", c13_oracles),
    (14, "determinism", c14_determinism),
];

fn main() -> ExitCode {
    let runs = Runs::default();
    let started = std::time::Instant::now();
    let mut failed = 0;
    for (n, name, check) in CRITERIA {
        let v = check(&runs);
        failed += usize::from(!v.pass);
        println!("criterion {n:>2} {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!(
        "{} passed, {failed} failed; {} cached simulations in {:.1?}",
        CRITERIA.len() - failed,
        runs.count(),
        started.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
