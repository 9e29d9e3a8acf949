use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::chain::{BlockId, Origin, TxId};
use crate::error::Result;

use super::config::SimConfig;

/// What a delivered message carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carried {
    Block,
    Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    RunStart {
        config: SimConfig,
    },
    TxCreated {
        round: u64,
        tx: TxId,
    },
    BlockMined {
        round: u64,
        block: BlockId,
        miner: Origin,
        chain: u32,
        parent: BlockId,
        depth: u64,
        txs: u32,
        /// Creator's live ledger length (blocks) when the block was mined.
        ledger_view: u64,
        withheld: bool,
        /// Mined after the last scheduled round, to close the run.
        drain: bool,
    },
    BlockReleased {
        round: u64,
        block: BlockId,
    },
    Delivered {
        round: u64,
        recipient: u32,
        carried: Carried,
        object: String,
    },
    CertIssued {
        round: u64,
        index: u64,
        block: BlockId,
        references: u32,
        tips: Vec<BlockId>,
        closing: bool,
    },
    CertEmbedded {
        round: u64,
        index: u64,
        block: BlockId,
    },
    CertAdopted {
        round: u64,
        party: u32,
        index: u64,
    },
    StablePrefix {
        round: u64,
        party: u32,
        blocks: u64,
        txs: u64,
    },
    TxIncluded {
        round: u64,
        tx: TxId,
        block: BlockId,
    },
    TxConfirmed {
        round: u64,
        tx: TxId,
    },
    SynchronyViolation {
        round: u64,
        message: u64,
        detail: String,
    },
    RunEnd {
        round: u64,
        certificates: u64,
    },
}

impl Event {
    pub fn round(&self) -> u64 {
        match self {
            Event::RunStart { .. } => 0,
            Event::TxCreated { round, .. }
            | Event::BlockMined { round, .. }
            | Event::BlockReleased { round, .. }
            | Event::Delivered { round, .. }
            | Event::CertIssued { round, .. }
            | Event::CertEmbedded { round, .. }
            | Event::CertAdopted { round, .. }
            | Event::StablePrefix { round, .. }
            | Event::TxIncluded { round, .. }
            | Event::TxConfirmed { round, .. }
            | Event::SynchronyViolation { round, .. }
            | Event::RunEnd { round, .. } => *round,
        }
    }
}

/// Append-only record of a run, serializable as one JSON object per line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Configuration recorded by the leading `RunStart` event.
    pub fn config(&self) -> Option<&SimConfig> {
        self.events.iter().find_map(|e| match e {
            Event::RunStart { config } => Some(config),
            _ => None,
        })
    }

    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_ndjson<R: BufRead>(input: R) -> Result<Self> {
        let mut log = EventLog::new();
        for line in input.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                log.push(serde_json::from_str(&line)?);
            }
        }
        Ok(log)
    }
}
