use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bft::BftConfig;
use crate::checkpoint::ServiceConfig;
use crate::error::{Error, Result};
use crate::fork_choice::Rule;

/// Protocol run by the checkpointing side of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Advocate,
    AdvocateHooks,
    AdvocateBft,
    AdvocatePc,
    NakamotoCp,
    StochasticCp,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Advocate,
        Variant::AdvocateHooks,
        Variant::AdvocateBft,
        Variant::AdvocatePc,
        Variant::NakamotoCp,
        Variant::StochasticCp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Advocate => "advocate",
            Variant::AdvocateHooks => "advocate-hooks",
            Variant::AdvocateBft => "advocate-bft",
            Variant::AdvocatePc => "advocate-pc",
            Variant::NakamotoCp => "nakamoto-cp",
            Variant::StochasticCp => "stochastic-cp",
        }
    }

    pub fn rule(self) -> Rule {
        match self {
            Variant::NakamotoCp => Rule::Nakamoto,
            Variant::StochasticCp => Rule::Stochastic,
            _ => Rule::Advocate,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    PrivateMiningBursts,
    Censorship,
    None,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::PrivateMiningBursts => "private-mining-bursts",
            Strategy::Censorship => "censorship",
            Strategy::None => "none",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Strategy::PrivateMiningBursts, Strategy::Censorship, Strategy::None]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown adversary strategy {s:?}")))
    }
}

/// One simulation run. Every field has a default, so a TOML file only
/// needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Adversarial share of mined blocks, in expectation.
    pub beta: f64,
    /// Per-round probability that some honest party mines a block.
    pub h: f64,
    pub e: u64,
    pub c: u64,
    /// Hooks window; only read by `advocate-hooks`.
    pub hook_t: Option<u64>,
    /// Network delivery bound in rounds.
    pub delta: u64,
    /// BFT finalization delay in rounds; only read by `advocate-bft`.
    pub delta_bft: u64,
    pub rounds: u64,
    pub seed: u64,
    pub variant: Variant,
    pub adversary: Strategy,
    /// Honest transactions created per round; the fractional part is a
    /// per-round Bernoulli draw.
    pub tx_rate: f64,
    /// Most honest transactions one block carries. `None` takes the
    /// whole mempool; with a cap, each block samples its share
    /// pseudo-randomly so concurrent blocks rarely overlap.
    pub block_capacity: Option<u32>,
    pub parties: u32,
    pub committee_n: u32,
    pub committee_f: u32,
    /// Rounds the checkpoint service waits before signing a candidate.
    pub service_delay: u64,
    /// Payload chains; values above one require `advocate-pc`.
    pub chains: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            beta: 0.0,
            h: 0.5,
            e: 5,
            c: 2,
            hook_t: None,
            delta: 1,
            delta_bft: 0,
            rounds: 600,
            seed: 1,
            variant: Variant::Advocate,
            adversary: Strategy::PrivateMiningBursts,
            tx_rate: 1.0,
            block_capacity: None,
            parties: 4,
            committee_n: 4,
            committee_f: 1,
            service_delay: 0,
            chains: 1,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SimConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1), got {}", self.beta));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return bad(format!("h must lie in (0, 1], got {}", self.h));
        }
        if self.c == 0 || self.e <= self.c {
            return bad(format!("need e > c >= 1, got e={} c={}", self.e, self.c));
        }
        if self.delta == 0 {
            return bad("delta must be at least one round".into());
        }
        if self.rounds == 0 || self.parties == 0 {
            return bad("rounds and parties must be positive".into());
        }
        if self.block_capacity == Some(0) {
            return bad("block_capacity must be positive".to_string());
        }
        if !(self.tx_rate.is_finite() && self.tx_rate >= 0.0) {
            return bad(format!("tx_rate must be finite and non-negative, got {}", self.tx_rate));
        }
        if self.chains == 0 || (self.chains > 1 && self.variant != Variant::AdvocatePc) {
            return bad(format!("{} chains need variant advocate-pc", self.chains));
        }
        match self.variant {
            Variant::AdvocateHooks if self.hook_t.is_none_or(|t| t == 0) => {
                return bad("advocate-hooks needs hook_t >= 1".into());
            }
            Variant::AdvocateBft => {
                let bft = self.bft_config()?;
                if self.c < bft.min_window(1) {
                    return bad(format!(
                        "BFT window needs c >= 1 + delta_bft = {}, got {}",
                        bft.min_window(1),
                        self.c
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn bft_config(&self) -> Result<BftConfig> {
        BftConfig::new(self.committee_n, self.committee_f, self.delta_bft)
    }

    /// Configuration of the checkpointing party (or of each replica).
    pub fn service_config(&self) -> ServiceConfig {
        ServiceConfig {
            epoch_e: self.e,
            window_c: self.c,
            hook_t: (self.variant == Variant::AdvocateHooks).then_some(self.hook_t).flatten(),
            service_delay: self.service_delay,
            rule: self.variant.rule(),
            issuer: 0,
            nonce_seed: self.seed,
        }
    }

    /// Expected adversarial blocks per round.
    pub fn adversary_rate(&self) -> f64 {
        self.h * self.beta / (1.0 - self.beta)
    }

    /// Effective BFT delay: zero outside `advocate-bft`.
    pub fn effective_delta_bft(&self) -> u64 {
        if self.variant == Variant::AdvocateBft {
            self.delta_bft
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let cfg = SimConfig::from_toml_str("beta = 0.5\nvariant = \"stochastic-cp\"\nseed = 9\n").unwrap();
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.variant, Variant::StochasticCp);
        assert_eq!(cfg.e, 5);
        assert_eq!(cfg.service_config().rule, Rule::Stochastic);
    }

    #[test]
    fn rejects_out_of_range() {
        for text in [
            "beta = 1.0",
            "h = 0.0",
            "e = 2\nc = 2",
            "delta = 0",
            "chains = 2",
            "variant = \"advocate-hooks\"",
            "variant = \"advocate-bft\"\ndelta_bft = 2\nc = 2",
            "unknown_key = 1",
        ] {
            assert!(SimConfig::from_toml_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn bft_window_accepts_adjusted_c() {
        let cfg = SimConfig::from_toml_str("variant = \"advocate-bft\"\ndelta_bft = 2\nc = 4\n").unwrap();
        assert_eq!(cfg.effective_delta_bft(), 2);
    }

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("censorship".parse::<Strategy>().unwrap(), Strategy::Censorship);
    }
}
