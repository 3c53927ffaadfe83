//! Slack constants and search knobs shared by the constructive stages.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{serde_ratio, Ratio};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub r: usize,
    #[serde(with = "serde_ratio")]
    pub gamma: Ratio,
    #[serde(with = "serde_ratio")]
    pub sigma: Ratio,
    #[serde(with = "serde_ratio")]
    pub beta: Ratio,
    #[serde(with = "serde_ratio")]
    pub nu: Ratio,
    #[serde(with = "serde_ratio")]
    pub alpha: Ratio,
    pub seed: u64,
    pub retry_limit: usize,
}

impl Config {
    /// Defaults: γ = 1/(2r), σ = 1/(8r), β = 1/(32r), ν = α = 1/(16r).
    pub fn for_r(r: usize) -> Self {
        let r64 = r as i64;
        Config {
            r,
            gamma: Ratio::new(1, 2 * r64),
            sigma: Ratio::new(1, 8 * r64),
            beta: Ratio::new(1, 32 * r64),
            nu: Ratio::new(1, 16 * r64),
            alpha: Ratio::new(1, 16 * r64),
            seed: 0,
            retry_limit: 50,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks `r >= 2`, `0 < β < σ < γ <= 1/r`, positive ν and α, and a
    /// positive retry limit.
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::Precondition(format!("r must be at least 2, got {}", self.r)));
        }
        let inv_r = Ratio::new(1, self.r as i64);
        if !(Ratio::zero() < self.beta && self.beta < self.sigma && self.sigma < self.gamma && self.gamma <= inv_r) {
            return Err(Error::Precondition(format!(
                "constants must satisfy 0 < beta < sigma < gamma <= 1/r (beta={}, sigma={}, gamma={})",
                self.beta, self.sigma, self.gamma
            )));
        }
        if self.nu <= Ratio::zero() || self.alpha <= Ratio::zero() {
            return Err(Error::Precondition("nu and alpha must be positive".into()));
        }
        if self.retry_limit == 0 {
            return Err(Error::Precondition("retry_limit must be at least 1".into()));
        }
        Ok(())
    }

    /// `1 - 1/r + slack`.
    pub fn threshold(&self, slack: Ratio) -> Ratio {
        Ratio::from_integer(1) - Ratio::new(1, self.r as i64) + slack
    }
}
