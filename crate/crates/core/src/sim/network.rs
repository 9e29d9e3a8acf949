use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chain::{Block, Digest};
use crate::parallel::PcCertificate;

/// A certificate as broadcast by the checkpointing side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertMessage {
    pub pc: PcCertificate,
    /// The run's final certificate; nothing will follow it.
    pub closing: bool,
}

#[derive(Clone, Debug)]
pub enum Message {
    Block(Arc<Block>),
    Cert(Arc<CertMessage>),
}

impl Message {
    pub fn key(&self) -> Digest {
        match self {
            Message::Block(b) => b.id.0,
            Message::Cert(c) => c.pc.cert.id(),
        }
    }
}

/// Delivery queue with per-recipient delays in `1..=delta`, drawn from a
/// hash of the message and the recipient so they never touch the lottery
/// stream.
#[derive(Clone, Debug)]
pub struct Network {
    seed: u64,
    delta: u64,
    queue: BTreeMap<u64, Vec<(u32, Message)>>,
}

impl Network {
    pub fn new(seed: u64, delta: u64) -> Self {
        Network {
            seed,
            delta,
            queue: BTreeMap::new(),
        }
    }

    pub fn delay(&self, key: &Digest, recipient: u32) -> u64 {
        if self.delta == 1 {
            return 1;
        }
        let mut buf = Vec::with_capacity(44);
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&key.0);
        buf.extend_from_slice(&recipient.to_le_bytes());
        let h = u64::from_le_bytes(Digest::of(&buf).0[..8].try_into().unwrap());
        1 + h % self.delta
    }

    pub fn send(&mut self, round: u64, recipient: u32, msg: Message) {
        let due = round + self.delay(&msg.key(), recipient);
        self.queue.entry(due).or_default().push((recipient, msg));
    }

    pub fn broadcast(&mut self, round: u64, recipients: impl IntoIterator<Item = u32>, msg: &Message) {
        for r in recipients {
            self.send(round, r, msg.clone());
        }
    }

    /// Messages due at `round`, in send order.
    pub fn take_due(&mut self, round: u64) -> Vec<(u32, Message)> {
        self.queue.remove(&round).unwrap_or_default()
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}
