use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use super::codec;

/// Seed string the genesis block id is derived from.
pub const GENESIS_SEED: &str = "advocate/genesis/v1";

/// A 32-byte SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0; 32]);

    pub fn of(bytes: &[u8]) -> Self {
        Digest(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).ok()?;
        Some(Digest(out))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", &self.to_hex()[..12])
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Digest::from_hex(&s).ok_or_else(|| serde::de::Error::custom("expected 64 hex chars"))
    }
}

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(
            Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub Digest);

        impl $name {
            pub const ZERO: $name = $name(Digest::ZERO);

            pub fn as_bytes(&self) -> &[u8; 32] {
                &self.0 .0
            }

            /// First eight hex characters, for logs.
            pub fn short(&self) -> String {
                self.0.to_hex()[..8].to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), self.0)
            }
        }
    };
}

id_newtype!(BlockId);
id_newtype!(TxId);

/// Which class of miner (or transaction issuer) produced an object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Honest,
    Adversarial,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Honest => "honest",
            Origin::Adversarial => "adversarial",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Origin::Honest => 0,
            Origin::Adversarial => 1,
        }
    }
}

/// Toy transfer: consumes one output of every listed transaction and creates
/// `outputs` new ones. No inputs means a mint, which is always valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: TxId,
    pub inputs: Vec<TxId>,
    pub outputs: u32,
    pub created_round: u64,
    pub origin: Origin,
    pub nonce: u64,
}

impl Transaction {
    pub fn new(inputs: Vec<TxId>, outputs: u32, created_round: u64, origin: Origin, nonce: u64) -> Self {
        let mut tx = Transaction {
            id: TxId::ZERO,
            inputs,
            outputs,
            created_round,
            origin,
            nonce,
        };
        tx.id = TxId(Digest::of(&codec::encode_transaction(&tx)));
        tx
    }

    pub fn mint(created_round: u64, origin: Origin, nonce: u64) -> Self {
        Self::new(Vec::new(), 1, created_round, origin, nonce)
    }

    pub fn is_mint(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Mock signature: the issuer and whether the signature verifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub issuer: u32,
    pub valid: bool,
}

impl Signature {
    pub fn by(issuer: u32) -> Self {
        Signature { issuer, valid: true }
    }

    /// Test hook: a signature that fails verification.
    pub fn forged(issuer: u32) -> Self {
        Signature { issuer, valid: false }
    }
}

/// Proof that a checkpoint transaction is final on the replicated log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalityWitness {
    pub smr_index: u64,
    pub quorum_bitmap: u64,
    pub committee_size: u32,
}

impl FinalityWitness {
    pub fn quorum(&self) -> u32 {
        self.quorum_bitmap.count_ones()
    }
}

/// A signed checkpoint: the checkpointed block plus the references to every
/// block that was not yet checkpointed when it was issued.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub index: u64,
    pub checkpointed_block: BlockId,
    /// Referenced blocks, in canonical order.
    pub references: Vec<BlockId>,
    pub signature: Signature,
    pub merkle_root: Option<Digest>,
    pub witness: Option<FinalityWitness>,
    /// Per-epoch randomness of the stochastic baseline.
    pub nonce: Option<u64>,
    pub issued_round: u64,
}

impl Certificate {
    /// Content id over index, checkpointed block, references and nonce.
    /// Signature, Merkle root and witness are transport data and excluded,
    /// so single-node and federated issuers produce identical ids.
    pub fn id(&self) -> Digest {
        Digest::of(&codec::encode_certificate_core(self))
    }

    pub fn is_bootstrap(&self) -> bool {
        self.index == 0
    }
}

/// Everything a miner decides about a new block; `seal` derives its id.
#[derive(Clone, Debug)]
pub struct NewBlock {
    pub parent: BlockId,
    pub miner: Origin,
    pub txs: Vec<Transaction>,
    pub round_mined: u64,
    pub embedded_cert: Option<Certificate>,
    pub hook: Option<u64>,
    pub chain_id: u32,
    pub nonce: u64,
}

impl NewBlock {
    pub fn child_of(parent: BlockId, miner: Origin, round_mined: u64, nonce: u64) -> Self {
        NewBlock {
            parent,
            miner,
            txs: Vec::new(),
            round_mined,
            embedded_cert: None,
            hook: None,
            chain_id: 0,
            nonce,
        }
    }

    pub fn with_txs(mut self, txs: Vec<Transaction>) -> Self {
        self.txs = txs;
        self
    }

    pub fn with_cert(mut self, cert: Certificate) -> Self {
        self.embedded_cert = Some(cert);
        self
    }

    pub fn with_hook(mut self, hook: u64) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn on_chain(mut self, chain_id: u32) -> Self {
        self.chain_id = chain_id;
        self
    }

    pub fn seal(self) -> Block {
        let mut block = Block {
            id: BlockId::ZERO,
            parent: self.parent,
            miner: self.miner,
            txs: self.txs,
            round_mined: self.round_mined,
            embedded_cert: self.embedded_cert,
            hook: self.hook,
            chain_id: self.chain_id,
            nonce: self.nonce,
            pow_valid: true,
        };
        block.id = block.compute_id();
        block
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    /// `BlockId::ZERO` for a genesis block.
    pub parent: BlockId,
    pub miner: Origin,
    pub txs: Vec<Transaction>,
    pub round_mined: u64,
    pub embedded_cert: Option<Certificate>,
    /// Index of the latest certificate the miner knew of (hooks variant).
    pub hook: Option<u64>,
    pub chain_id: u32,
    pub nonce: u64,
    pub pow_valid: bool,
}

impl Block {
    /// Genesis of chain `chain_id`; chain 0 is the single-chain genesis.
    pub fn genesis(chain_id: u32) -> Self {
        let seed = if chain_id == 0 {
            GENESIS_SEED.to_string()
        } else {
            format!("{GENESIS_SEED}/chain/{chain_id}")
        };
        let nonce = u64::from_le_bytes(Digest::of(seed.as_bytes()).0[..8].try_into().unwrap());
        let mut block = NewBlock::child_of(BlockId::ZERO, Origin::Honest, 0, nonce)
            .on_chain(chain_id)
            .seal();
        block.id = BlockId(Digest::of(seed.as_bytes()));
        block
    }

    pub fn is_genesis(&self) -> bool {
        self.parent == BlockId::ZERO
    }

    pub fn compute_id(&self) -> BlockId {
        BlockId(Digest::of(&codec::encode_block(self)))
    }

    /// Index of the embedded certificate, if any.
    pub fn cert_index(&self) -> Option<u64> {
        self.embedded_cert.as_ref().map(|c| c.index)
    }

    pub fn embeds(&self, cert: &Certificate) -> bool {
        self.embedded_cert
            .as_ref()
            .is_some_and(|c| c.index == cert.index && c.id() == cert.id())
    }
}
