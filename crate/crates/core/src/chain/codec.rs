//! Canonical encodings.
//!
//! Binary layout (hash input), little-endian throughout:
//!
//! ```text
//! tx    := 0x54 | u32 n_inputs | n_inputs * [u8;32] | u32 outputs
//!          | u64 created_round | u8 origin | u64 nonce
//! cert  := 0x43 | u64 index | [u8;32] checkpointed | u32 n_refs
//!          | n_refs * [u8;32] | opt(u64 nonce)
//! block := 0x42 | u32 chain_id | [u8;32] parent | u8 miner | u64 round_mined
//!          | u64 nonce | u32 n_txs | n_txs * [u8;32] tx id
//!          | opt([u8;32] cert id) | opt(u64 hook)
//! opt(x):= 0x00 | 0x01 x
//! ```
//!
//! Origin bytes: honest 0, adversarial 1. Blocks commit to their embedded
//! certificate through its core id only.
//!
//! The text format is line-oriented `key value` pairs, one object per
//! paragraph, with nested certificates indented by two spaces.

use std::fmt::Write as _;

use super::types::{Block, Certificate, Digest, Transaction};

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) -> &mut Self {
        self.0.push(v);
        self
    }
    fn u32(&mut self, v: u32) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }
    fn u64(&mut self, v: u64) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }
    fn digest(&mut self, d: &Digest) -> &mut Self {
        self.0.extend_from_slice(&d.0);
        self
    }
    fn len(&mut self, n: usize) -> &mut Self {
        self.u32(u32::try_from(n).expect("collection exceeds u32::MAX"))
    }
    fn opt_u64(&mut self, v: Option<u64>) -> &mut Self {
        match v {
            Some(x) => self.u8(1).u64(x),
            None => self.u8(0),
        }
    }
    fn opt_digest(&mut self, v: Option<Digest>) -> &mut Self {
        match v {
            Some(d) => self.u8(1).digest(&d),
            None => self.u8(0),
        }
    }
}

pub fn encode_transaction(tx: &Transaction) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(b'T').len(tx.inputs.len());
    for input in &tx.inputs {
        w.digest(&input.0);
    }
    w.u32(tx.outputs)
        .u64(tx.created_round)
        .u8(tx.origin.tag())
        .u64(tx.nonce);
    w.0
}

pub fn encode_certificate_core(cert: &Certificate) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(b'C')
        .u64(cert.index)
        .digest(&cert.checkpointed_block.0)
        .len(cert.references.len());
    for r in &cert.references {
        w.digest(&r.0);
    }
    w.opt_u64(cert.nonce);
    w.0
}

pub fn encode_block(block: &Block) -> Vec<u8> {
    let mut w = Writer::default();
    w.u8(b'B')
        .u32(block.chain_id)
        .digest(&block.parent.0)
        .u8(block.miner.tag())
        .u64(block.round_mined)
        .u64(block.nonce)
        .len(block.txs.len());
    for tx in &block.txs {
        w.digest(&tx.id.0);
    }
    w.opt_digest(block.embedded_cert.as_ref().map(Certificate::id))
        .opt_u64(block.hook);
    w.0
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn transaction_text(tx: &Transaction) -> String {
    let mut s = String::new();
    writeln!(s, "tx {}", tx.id).unwrap();
    for input in &tx.inputs {
        writeln!(s, "input {input}").unwrap();
    }
    writeln!(s, "outputs {}", tx.outputs).unwrap();
    writeln!(s, "created_round {}", tx.created_round).unwrap();
    writeln!(s, "origin {}", tx.origin.as_str()).unwrap();
    writeln!(s, "nonce {}", tx.nonce).unwrap();
    s
}

pub fn certificate_text(cert: &Certificate) -> String {
    let mut s = String::new();
    writeln!(s, "certificate {}", cert.id()).unwrap();
    writeln!(s, "index {}", cert.index).unwrap();
    writeln!(s, "checkpointed {}", cert.checkpointed_block).unwrap();
    for r in &cert.references {
        writeln!(s, "reference {r}").unwrap();
    }
    writeln!(
        s,
        "signature {} {}",
        cert.signature.issuer,
        if cert.signature.valid { "valid" } else { "invalid" }
    )
    .unwrap();
    writeln!(s, "merkle_root {}", opt(cert.merkle_root)).unwrap();
    match &cert.witness {
        Some(w) => writeln!(
            s,
            "witness {} {:#x} {}",
            w.smr_index, w.quorum_bitmap, w.committee_size
        )
        .unwrap(),
        None => writeln!(s, "witness -").unwrap(),
    }
    writeln!(s, "nonce {}", opt(cert.nonce)).unwrap();
    writeln!(s, "issued_round {}", cert.issued_round).unwrap();
    s
}

pub fn block_text(block: &Block) -> String {
    let mut s = String::new();
    writeln!(s, "block {}", block.id).unwrap();
    writeln!(s, "parent {}", block.parent).unwrap();
    writeln!(s, "chain {}", block.chain_id).unwrap();
    writeln!(s, "miner {}", block.miner.as_str()).unwrap();
    writeln!(s, "round {}", block.round_mined).unwrap();
    writeln!(s, "nonce {}", block.nonce).unwrap();
    writeln!(s, "hook {}", opt(block.hook)).unwrap();
    writeln!(s, "pow {}", if block.pow_valid { "valid" } else { "invalid" }).unwrap();
    for tx in &block.txs {
        writeln!(s, "tx {}", tx.id).unwrap();
    }
    match &block.embedded_cert {
        Some(c) => {
            for line in certificate_text(c).lines() {
                writeln!(s, "  {line}").unwrap();
            }
        }
        None => writeln!(s, "certificate -").unwrap(),
    }
    s
}
