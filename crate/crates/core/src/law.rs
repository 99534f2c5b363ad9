//! Reward laws: how a realized reward is drawn around the expected reward
//! of the current pull.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which subgaussian constant to report for a bounded-uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgaussianProxy {
    /// Variance of the uniform law, `w²/3`.
    #[default]
    Uniform,
    /// Hoeffding's range bound, `(2w)²/4`.
    Hoeffding,
}

/// Reward distribution around the mean `μ_i(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "law_params", rename_all = "snake_case")]
pub enum RewardLaw {
    Bernoulli,
    /// Uniform on `[μ − w, μ + w]`. `w = 0` gives deterministic rewards.
    BoundedUniform {
        half_width: f64,
        #[serde(default)]
        proxy: SubgaussianProxy,
    },
}

impl RewardLaw {
    pub fn bounded_uniform(half_width: f64) -> Self {
        RewardLaw::BoundedUniform { half_width, proxy: SubgaussianProxy::Uniform }
    }

    pub fn deterministic() -> Self {
        Self::bounded_uniform(0.0)
    }

    /// The subgaussian parameter `λ²`.
    pub fn subgaussian(&self) -> f64 {
        match *self {
            RewardLaw::Bernoulli => 0.25,
            RewardLaw::BoundedUniform { half_width, proxy } => match proxy {
                SubgaussianProxy::Uniform => half_width * half_width / 3.0,
                SubgaussianProxy::Hoeffding => half_width * half_width,
            },
        }
    }

    /// True when every realized reward lies in `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        matches!(self, RewardLaw::Bernoulli)
    }

    pub fn validate(&self) -> Result<()> {
        if let RewardLaw::BoundedUniform { half_width, .. } = *self {
            if !(0.0..=0.5).contains(&half_width) {
                return Err(Error::InvalidLaw(format!("half_width must lie in [0, 0.5], got {half_width}")));
            }
        }
        Ok(())
    }

    /// Whether a mean is admissible: the support must stay inside `[0, 1]`.
    pub fn admits_mean(&self, mean: f64) -> bool {
        match *self {
            RewardLaw::Bernoulli => (0.0..=1.0).contains(&mean),
            RewardLaw::BoundedUniform { half_width, .. } => mean - half_width >= 0.0 && mean + half_width <= 1.0,
        }
    }

    /// Draws one reward with expectation `mean`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            RewardLaw::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardLaw::BoundedUniform { half_width, .. } => {
                if half_width == 0.0 {
                    mean
                } else {
                    mean - half_width + 2.0 * half_width * rng.random::<f64>()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subgaussian_constants() {
        assert_eq!(RewardLaw::Bernoulli.subgaussian(), 0.25);
        let u = RewardLaw::bounded_uniform(0.3);
        assert!((u.subgaussian() - 0.03).abs() < 1e-15);
        let h = RewardLaw::BoundedUniform { half_width: 0.3, proxy: SubgaussianProxy::Hoeffding };
        assert!((h.subgaussian() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn sample_means_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for law in [RewardLaw::Bernoulli, RewardLaw::bounded_uniform(0.2)] {
            let n = 200_000;
            let mean = 0.35;
            let s: f64 = (0..n).map(|_| law.sample(mean, &mut rng)).sum();
            // 5 standard errors
            assert!((s / n as f64 - mean).abs() < 5.0 * 0.5 / (n as f64).sqrt(), "{law:?}");
        }
    }

    #[test]
    fn rewards_are_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let law = RewardLaw::bounded_uniform(0.1);
        assert!((0..10_000).all(|_| law.sample(0.1, &mut rng) >= 0.0));
        assert!(law.admits_mean(0.1));
        assert!(!law.admits_mean(0.05));
    }

    #[test]
    fn serde_shape() {
        let s = serde_json::to_string(&RewardLaw::Bernoulli).unwrap();
        assert_eq!(s, r#"{"law":"bernoulli"}"#);
        let back: RewardLaw = serde_json::from_str(r#"{"law":"bounded_uniform","law_params":{"half_width":0.1}}"#).unwrap();
        assert_eq!(back, RewardLaw::bounded_uniform(0.1));
    }
}
