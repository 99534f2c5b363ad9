//! Sequential decision policies: forced-exploration sliding-window Beta
//! and Gaussian Thompson sampling, and the UCB1 / SW-UCB baselines.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// ET-Beta-SWTS and its special cases (Beta-TS, ET-Beta-TS, Beta-SWTS).
    BetaSwts,
    /// γ-ET-SWGTS and its special cases (γ-GTS, γ-SWGTS).
    GammaSwgts,
    Ucb1,
    SwUcb,
}

pub const DEFAULT_ALPHA_UCB: f64 = 2.0;
pub const DEFAULT_XI: f64 = 0.6;

fn default_alpha_ucb() -> f64 {
    DEFAULT_ALPHA_UCB
}

fn default_xi() -> f64 {
    DEFAULT_XI
}

/// Policy parameters. `window: None` means "no window" (`τ = T`) for the
/// Thompson variants and `⌈4√(T ln T)⌉` for SW-UCB; `precision: None`
/// means `γ = min{1/(4λ²), 1}` for the Gaussian variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub forced_exploration: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default = "default_alpha_ucb")]
    pub alpha_ucb: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            forced_exploration: 0,
            window: None,
            precision: None,
            alpha_ucb: DEFAULT_ALPHA_UCB,
            xi: DEFAULT_XI,
        }
    }

    pub fn beta_ts() -> Self {
        Self::new(PolicyKind::BetaSwts)
    }

    pub fn et_beta_ts(forced: usize) -> Self {
        Self::beta_ts().with_forced(forced)
    }

    pub fn beta_swts(window: usize) -> Self {
        Self::beta_ts().with_window(window)
    }

    pub fn gamma_gts() -> Self {
        Self::new(PolicyKind::GammaSwgts).with_forced(1)
    }

    pub fn gamma_swgts(window: usize) -> Self {
        Self::gamma_gts().with_window(window)
    }

    pub fn ucb1() -> Self {
        Self::new(PolicyKind::Ucb1)
    }

    pub fn sw_ucb() -> Self {
        Self::new(PolicyKind::SwUcb)
    }

    pub fn with_forced(mut self, forced: usize) -> Self {
        self.forced_exploration = forced;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = Some(precision);
        self
    }

    pub fn needs_binary_rewards(&self) -> bool {
        self.kind == PolicyKind::BetaSwts
    }

    /// Window length in rounds at horizon `T`.
    pub fn resolved_window(&self, horizon: usize) -> usize {
        match (self.window, self.kind) {
            (Some(w), _) => w,
            (None, PolicyKind::SwUcb) => sw_ucb_default_window(horizon).min(horizon.max(1)),
            (None, _) => horizon,
        }
    }

    /// `γ` for the Gaussian variant given the reward law's `λ²`.
    pub fn resolved_precision(&self, subgaussian: f64) -> f64 {
        self.precision.unwrap_or_else(|| (1.0 / (4.0 * subgaussian)).min(1.0))
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if horizon == 0 {
            return Err(Error::Policy("horizon must be positive".into()));
        }
        if let Some(w) = self.window {
            if w == 0 || w > horizon {
                return Err(Error::Policy(format!("window {w} outside [1, {horizon}]")));
            }
        }
        if let Some(g) = self.precision {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Policy(format!("precision must be positive, got {g}")));
            }
        }
        if !(self.alpha_ucb >= 0.0 && self.alpha_ucb.is_finite()) || !(self.xi >= 0.0 && self.xi.is_finite()) {
            return Err(Error::Policy("exploration constants must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// `⌈4√(T ln T)⌉`, at least 1.
pub fn sw_ucb_default_window(horizon: usize) -> usize {
    let t = horizon as f64;
    ((4.0 * (t * t.ln()).sqrt()).ceil() as usize).max(1)
}

/// The sequential-decision interface the harness drives.
pub trait Agent {
    fn select_arm(&mut self, t: usize) -> Result<usize>;
    fn update(&mut self, arm: usize, reward: f64, t: usize) -> Result<()>;
}

/// Per-arm sliding window of `(round, reward)` with running aggregates
/// `N_{i,t,τ}` and `S_{i,t,τ}`.
#[derive(Debug, Clone, Default)]
struct ArmWindow {
    entries: VecDeque<(usize, f64)>,
    sum: f64,
    evictions_since_resync: usize,
}

impl ArmWindow {
    fn push(&mut self, round: usize, reward: f64) {
        self.entries.push_back((round, reward));
        self.sum += reward;
    }

    /// Drops entries stamped before `oldest`.
    fn evict(&mut self, oldest: usize, window: usize) {
        while let Some(&(stamp, reward)) = self.entries.front() {
            if stamp >= oldest {
                break;
            }
            self.entries.pop_front();
            self.sum -= reward;
            self.evictions_since_resync += 1;
        }
        if self.entries.is_empty() {
            self.sum = 0.0;
            self.evictions_since_resync = 0;
        } else if self.evictions_since_resync >= window {
            // bounds floating-point drift for real-valued rewards; sums of
            // 0/1 rewards are exact either way
            self.sum = self.entries.iter().map(|&(_, r)| r).sum();
            self.evictions_since_resync = 0;
        }
    }

    fn count(&self) -> usize {
        self.entries.len()
    }
}

/// Mutable state of one policy run.
#[derive(Debug, Clone)]
pub struct Policy {
    config: PolicyConfig,
    horizon: usize,
    window: usize,
    precision: f64,
    arms: Vec<ArmWindow>,
    lifetime: Vec<usize>,
    lifetime_sums: Vec<f64>,
    round: usize,
    rng: ChaCha8Rng,
    scores: Vec<f64>,
}

impl Policy {
    /// `subgaussian` is the `λ²` of the reward law, used for the default `γ`.
    pub fn new(config: PolicyConfig, arms: usize, horizon: usize, subgaussian: f64, seed: u64) -> Result<Self> {
        config.validate(horizon)?;
        if arms == 0 {
            return Err(Error::Policy("need at least one arm".into()));
        }
        Ok(Policy {
            config,
            horizon,
            window: config.resolved_window(horizon),
            precision: config.resolved_precision(subgaussian),
            arms: vec![ArmWindow::default(); arms],
            lifetime: vec![0; arms],
            lifetime_sums: vec![0.0; arms],
            round: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            scores: vec![0.0; arms],
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// `(N_{i,t,τ}, S_{i,t,τ})` for the next round `t = round() + 1`.
    pub fn window_counts(&self, arm: usize) -> (usize, f64) {
        (self.arms[arm].count(), self.arms[arm].sum)
    }

    pub fn lifetime_counts(&self) -> &[usize] {
        &self.lifetime
    }

    /// Oldest round stamp still in an arm's window.
    pub fn oldest_stamp(&self, arm: usize) -> Option<usize> {
        self.arms[arm].entries.front().map(|&(s, _)| s)
    }

    /// `(α, β) = (S + 1, N − S + 1)` of the Beta posterior.
    pub fn beta_posterior(&self, arm: usize) -> (f64, f64) {
        let (n, s) = self.window_counts(arm);
        (s + 1.0, n as f64 - s + 1.0)
    }

    fn check_round(&self, t: usize) -> Result<()> {
        if t > self.horizon {
            return Err(Error::RoundOutOfRange { round: t, lo: 1, hi: self.horizon });
        }
        if t != self.round + 1 {
            return Err(Error::Policy(format!("round {t} out of order; expected {}", self.round + 1)));
        }
        Ok(())
    }

    fn argmax_random_ties(&mut self) -> usize {
        let best = self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties = self.scores.iter().filter(|&&s| s == best).count();
        let pick = if ties > 1 { self.rng.random_range(0..ties) } else { 0 };
        self.scores.iter().enumerate().filter(|&(_, &s)| s == best).nth(pick).map(|(i, _)| i).unwrap_or(0)
    }

    fn thompson_beta(&mut self) -> Result<usize> {
        for i in 0..self.arms.len() {
            let (a, b) = self.beta_posterior(i);
            let dist = Beta::new(a, b).map_err(|e| Error::Policy(format!("beta posterior ({a}, {b}): {e}")))?;
            self.scores[i] = dist.sample(&mut self.rng);
        }
        Ok(self.argmax_random_ties())
    }

    fn thompson_gauss(&mut self) -> usize {
        if let Some(i) = self.arms.iter().position(|w| w.count() == 0) {
            return i;
        }
        for i in 0..self.arms.len() {
            let (n, s) = self.window_counts(i);
            let n = n as f64;
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.scores[i] = s / n + z / (self.precision * n).sqrt();
        }
        self.argmax_random_ties()
    }

    fn ucb(&mut self, t: usize) -> usize {
        let windowed = self.config.kind == PolicyKind::SwUcb;
        let unpulled = (0..self.arms.len()).position(|i| {
            if windowed {
                self.arms[i].count() == 0
            } else {
                self.lifetime[i] == 0
            }
        });
        if let Some(i) = unpulled {
            return i;
        }
        for i in 0..self.arms.len() {
            self.scores[i] = if windowed {
                let (n, s) = self.window_counts(i);
                let horizon_ln = (t.min(self.window) as f64).ln();
                s / n as f64 + (self.config.xi * horizon_ln / n as f64).sqrt()
            } else {
                let n = self.lifetime[i] as f64;
                self.lifetime_sums[i] / n + (self.config.alpha_ucb * (t as f64).ln() / n).sqrt()
            };
        }
        self.argmax_random_ties()
    }
}

impl Agent for Policy {
    fn select_arm(&mut self, t: usize) -> Result<usize> {
        self.check_round(t)?;
        let k = self.arms.len();
        if t <= k * self.config.forced_exploration {
            return Ok((t - 1) % k);
        }
        match self.config.kind {
            PolicyKind::BetaSwts => self.thompson_beta(),
            PolicyKind::GammaSwgts => Ok(self.thompson_gauss()),
            PolicyKind::Ucb1 | PolicyKind::SwUcb => Ok(self.ucb(t)),
        }
    }

    /// Appends the reward, then evicts every entry older than the window of
    /// round `t + 1`, i.e. stamps `< t + 1 − τ`.
    fn update(&mut self, arm: usize, reward: f64, t: usize) -> Result<()> {
        self.check_round(t)?;
        if arm >= self.arms.len() {
            return Err(Error::ArmOutOfRange { arm, arms: self.arms.len() });
        }
        if !reward.is_finite() {
            return Err(Error::Policy(format!("reward {reward} is not finite")));
        }
        if self.config.needs_binary_rewards() && reward != 0.0 && reward != 1.0 {
            return Err(Error::Policy(format!("Beta posterior needs rewards in {{0, 1}}, got {reward}")));
        }
        self.arms[arm].push(t, reward);
        self.lifetime[arm] += 1;
        self.lifetime_sums[arm] += reward;
        let oldest = (t + 1).saturating_sub(self.window);
        for w in &mut self.arms {
            w.evict(oldest, self.window);
        }
        self.round = t;
        Ok(())
    }
}

/// `(N_{i,t,τ}, S_{i,t,τ})` recomputed from a full history
/// `history[s−1] = (I_s, X_s)` over rounds `s ∈ [max(t−τ, 1), t−1]`.
pub fn recount_window(history: &[(usize, f64)], arms: usize, t: usize, window: usize) -> Vec<(usize, f64)> {
    let mut out = vec![(0usize, 0.0f64); arms];
    let lo = t.saturating_sub(window).max(1);
    for s in lo..t {
        let (arm, reward) = history[s - 1];
        out[arm].0 += 1;
        out[arm].1 += reward;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn policy(config: PolicyConfig, arms: usize, horizon: usize) -> Policy {
        Policy::new(config, arms, horizon, 0.25, 11).unwrap()
    }

    #[test]
    fn forced_exploration_round_robin() {
        let mut p = policy(PolicyConfig::et_beta_ts(2), 3, 100);
        let mut pulls = Vec::new();
        for t in 1..=6 {
            let a = p.select_arm(t).unwrap();
            pulls.push(a);
            p.update(a, 1.0, t).unwrap();
        }
        assert_eq!(pulls, vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(p.lifetime_counts(), &[2, 2, 2]);
    }

    #[test]
    fn window_example() {
        // τ = 3, arm 0 pulled at rounds 1, 2, 4: at t = 5 rounds 2..4 are in the window
        let mut p = policy(PolicyConfig::beta_swts(3), 2, 10);
        for (t, arm) in [(1, 0), (2, 0), (3, 1), (4, 0)] {
            p.update(arm, 1.0, t).unwrap();
        }
        assert_eq!(p.window_counts(0), (2, 2.0));
        assert_eq!(p.window_counts(1), (1, 1.0));
        assert!(p.oldest_stamp(0).unwrap() >= 5 - 3);
    }

    #[test]
    fn no_window_keeps_everything() {
        let mut p = policy(PolicyConfig::beta_ts(), 2, 50);
        for t in 1..=50 {
            p.update(t % 2, (t % 3 == 0) as u8 as f64, t).unwrap();
        }
        assert_eq!(p.window_counts(0).0 + p.window_counts(1).0, 50);
        assert_eq!(p.window_counts(0).0, p.lifetime_counts()[0]);
    }

    #[test]
    fn beta_posterior_parameters() {
        let mut p = policy(PolicyConfig::beta_ts(), 2, 10);
        for (t, r) in [1.0, 0.0, 1.0, 1.0, 0.0].into_iter().enumerate() {
            p.update(0, r, t + 1).unwrap();
        }
        assert_eq!(p.beta_posterior(0), (4.0, 3.0));
        assert_eq!(p.beta_posterior(1), (1.0, 1.0));
    }

    #[test]
    fn beta_rejects_real_rewards() {
        let mut p = policy(PolicyConfig::beta_ts(), 2, 10);
        assert!(p.update(0, 0.5, 1).is_err());
        let mut g = policy(PolicyConfig::gamma_gts(), 2, 10);
        g.update(0, 0.5, 1).unwrap();
    }

    #[test]
    fn rounds_must_be_sequential() {
        let mut p = policy(PolicyConfig::beta_ts(), 2, 3);
        assert!(p.select_arm(2).is_err());
        p.update(0, 1.0, 1).unwrap();
        assert!(p.update(0, 1.0, 1).is_err());
        p.update(0, 1.0, 2).unwrap();
        p.update(0, 1.0, 3).unwrap();
        assert!(matches!(p.select_arm(4), Err(Error::RoundOutOfRange { .. })));
    }

    #[test]
    fn gauss_forces_evicted_arm() {
        let mut p = policy(PolicyConfig::gamma_swgts(2), 3, 100);
        // γ-GTS forces one pull per arm first
        for t in 1..=3 {
            assert_eq!(p.select_arm(t).unwrap(), t - 1);
            p.update(t - 1, 0.5, t).unwrap();
        }
        // window 2: only rounds 2, 3 visible at t = 4, so arm 0 has N = 0
        assert_eq!(p.window_counts(0).0, 0);
        assert_eq!(p.select_arm(4).unwrap(), 0);
    }

    #[test]
    fn beta_prefers_all_successes() {
        let mut p = policy(PolicyConfig::beta_ts(), 2, 200);
        for t in 1..=100 {
            let arm = (t - 1) % 2;
            p.update(arm, if arm == 0 { 1.0 } else { 0.0 }, t).unwrap();
        }
        assert_eq!(p.window_counts(0), (50, 50.0));
        assert_eq!(p.window_counts(1), (50, 0.0));
        let draws = 10_000;
        let first = (0..draws).filter(|_| p.select_arm(101).unwrap() == 0).count();
        assert!(first as f64 / draws as f64 > 0.999, "{first}");
    }

    #[test]
    fn ucb_bootstrap_and_greedy() {
        let mut p = policy(PolicyConfig::ucb1(), 2, 100);
        assert_eq!(p.select_arm(1).unwrap(), 0);
        p.update(0, 0.9, 1).unwrap();
        assert_eq!(p.select_arm(2).unwrap(), 1);
        p.update(1, 0.1, 2).unwrap();
        assert_eq!(p.select_arm(3).unwrap(), 0);
        let mut s = policy(PolicyConfig::sw_ucb(), 2, 100);
        s.update(0, 0.9, 1).unwrap();
        s.update(1, 0.1, 2).unwrap();
        assert_eq!(s.select_arm(3).unwrap(), 0);
    }

    #[test]
    fn sw_ucb_default_window_value() {
        assert_eq!(sw_ucb_default_window(10_000), 1214);
        assert_eq!(PolicyConfig::sw_ucb().resolved_window(10_000), 1214);
        assert_eq!(PolicyConfig::beta_ts().resolved_window(10_000), 10_000);
    }

    #[test]
    fn default_precision() {
        assert_eq!(PolicyConfig::gamma_gts().resolved_precision(0.25), 1.0);
        assert_eq!(PolicyConfig::gamma_gts().resolved_precision(1.0), 0.25);
        assert_eq!(PolicyConfig::gamma_gts().resolved_precision(0.0), 1.0);
        assert_eq!(PolicyConfig::gamma_gts().with_precision(0.3).resolved_precision(0.25), 0.3);
    }

    #[test]
    fn config_json_defaults() {
        let c: PolicyConfig = serde_json::from_str(r#"{"kind":"gamma_swgts","forced_exploration":1,"window":100}"#).unwrap();
        assert_eq!(c, PolicyConfig::gamma_swgts(100));
        let back: PolicyConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn identical_seeds_identical_choices() {
        let run = || {
            let mut p = policy(PolicyConfig::beta_swts(20), 4, 300);
            let mut pulls = Vec::new();
            for t in 1..=300 {
                let a = p.select_arm(t).unwrap();
                pulls.push(a);
                p.update(a, ((t * 7 + a) % 3 == 0) as u8 as f64, t).unwrap();
            }
            pulls
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #[test]
        fn window_matches_recount(
            trace in proptest::collection::vec((0usize..4, proptest::bool::ANY), 1..300),
            window in 1usize..40,
        ) {
            let horizon = trace.len();
            let window = window.min(horizon);
            let mut p = policy(PolicyConfig::beta_swts(window), 4, horizon);
            let mut history = Vec::new();
            for (s, &(arm, hit)) in trace.iter().enumerate() {
                let t = s + 1;
                let expect = recount_window(&history, 4, t, window);
                for i in 0..4 {
                    prop_assert_eq!(p.window_counts(i), expect[i]);
                }
                let r = hit as u8 as f64;
                p.update(arm, r, t).unwrap();
                history.push((arm, r));
            }
        }

        #[test]
        fn real_rewards_stay_close_to_recount(
            trace in proptest::collection::vec((0usize..3, 0.0f64..=1.0), 1..400),
            window in 1usize..30,
        ) {
            let horizon = trace.len();
            let window = window.min(horizon);
            let mut p = policy(PolicyConfig::gamma_swgts(window), 3, horizon);
            let mut history = Vec::new();
            for (s, &(arm, r)) in trace.iter().enumerate() {
                p.update(arm, r, s + 1).unwrap();
                history.push((arm, r));
                let expect = recount_window(&history, 3, s + 2, window);
                for i in 0..3 {
                    let (n, sum) = p.window_counts(i);
                    prop_assert_eq!(n, expect[i].0);
                    prop_assert!((sum - expect[i].1).abs() < 1e-9);
                }
            }
        }
    }
}
