//! Pseudo-regret accounting and the pull-count (Wald) upper estimate.

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Incremental `R̂(t) = Σ_{s≤t} μ_{i*}(s) − Σ_{s≤t} μ_{I_s}(N_{I_s,s})`.
///
/// Tracks lifetime pull counts so each `record` is O(1).
#[derive(Debug, Clone)]
pub struct RegretAccumulator<'a> {
    instance: &'a Instance,
    counts: Vec<usize>,
    round: usize,
    optimal_sum: f64,
    collected_sum: f64,
}

impl<'a> RegretAccumulator<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        RegretAccumulator {
            instance,
            counts: vec![0; instance.num_arms()],
            round: 0,
            optimal_sum: 0.0,
            collected_sum: 0.0,
        }
    }

    /// Registers one pull and returns `R̂` after it.
    pub fn record(&mut self, arm: usize) -> Result<f64> {
        self.instance.check_arm(arm)?;
        if self.round >= self.instance.horizon() {
            return Err(Error::RoundOutOfRange { round: self.round + 1, lo: 1, hi: self.instance.horizon() });
        }
        self.round += 1;
        self.counts[arm] += 1;
        self.optimal_sum += self.instance.mu_unchecked(self.instance.optimal_arm(), self.round);
        self.collected_sum += self.instance.mu_unchecked(arm, self.counts[arm]);
        Ok(self.regret())
    }

    pub fn regret(&self) -> f64 {
        self.optimal_sum - self.collected_sum
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Lifetime pull counts so far.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

/// The full trajectory `R̂(1), …, R̂(len)` of a pull sequence.
pub fn pseudo_regret(instance: &Instance, pulls: &[usize]) -> Result<Vec<f64>> {
    let mut acc = RegretAccumulator::new(instance);
    pulls.iter().map(|&a| acc.record(a)).collect()
}

/// `Σ_{i≠i*} Δ_i(T, 1) · N_{i,T}`.
pub fn wald_upper_estimate(instance: &Instance, pull_counts: &[usize]) -> Result<f64> {
    if pull_counts.len() != instance.num_arms() {
        return Err(Error::InvalidInstance(format!(
            "expected {} pull counts, got {}",
            instance.num_arms(),
            pull_counts.len()
        )));
    }
    let total: usize = pull_counts.iter().sum();
    if total > instance.horizon() {
        return Err(Error::OutOfRange(format!("pull counts sum to {total} > horizon {}", instance.horizon())));
    }
    let t_max = instance.horizon();
    let opt = instance.optimal_arm();
    let top = instance.mu_unchecked(opt, t_max);
    Ok(instance
        .suboptimal_arms()
        .map(|i| (top - instance.mu_unchecked(i, 1)).max(0.0) * pull_counts[i] as f64)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::RewardCurve;
    use crate::instance::Arm;
    use proptest::prelude::*;

    fn stationary() -> Instance {
        Instance::new(
            vec![Arm::bernoulli(RewardCurve::constant(0.6)), Arm::bernoulli(RewardCurve::constant(0.5))],
            200,
        )
        .unwrap()
    }

    fn rising() -> Instance {
        Instance::new(
            vec![
                Arm::bernoulli(RewardCurve::LinearCapped { slope: 1.0 / 40.0, cap: 0.5, offset: 1.0 }),
                Arm::bernoulli(RewardCurve::LinearCapped { slope: 1.0 / 80.0, cap: 0.25, offset: 1.0 }),
                Arm::bernoulli(RewardCurve::Exponential { c: 0.3, a: 0.05 }),
            ],
            120,
        )
        .unwrap()
    }

    #[test]
    fn optimal_only_has_zero_regret() {
        let inst = rising();
        let pulls = vec![inst.optimal_arm(); 120];
        assert!(pseudo_regret(&inst, &pulls).unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn constant_gap_grows_linearly() {
        let inst = stationary();
        let traj = pseudo_regret(&inst, &[1; 200]).unwrap();
        for (t, r) in traj.iter().enumerate() {
            assert!((r - 0.1 * (t + 1) as f64).abs() < 1e-10);
        }
        assert!((wald_upper_estimate(&inst, &[0, 100]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(wald_upper_estimate(&inst, &[150, 0]).unwrap(), 0.0);
    }

    #[test]
    fn alternating_pulls_match_direct_recomputation() {
        let inst = rising();
        let pulls: Vec<usize> = (0..120).map(|t| t % 3).collect();
        let traj = pseudo_regret(&inst, &pulls).unwrap();
        for t in 1..=120 {
            let best: f64 = (1..=t).map(|s| inst.arms()[0].curve.eval(s)).sum();
            let mut got = 0.0;
            for s in 0..t {
                let arm = pulls[s];
                let n = pulls[..=s].iter().filter(|&&a| a == arm).count();
                got += inst.arms()[arm].curve.eval(n);
            }
            assert!((traj[t - 1] - (best - got)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let inst = stationary();
        assert!(pseudo_regret(&inst, &[2]).is_err());
        assert!(pseudo_regret(&inst, &[0; 201]).is_err());
        assert!(wald_upper_estimate(&inst, &[150, 51]).is_err());
    }

    proptest! {
        #[test]
        fn wald_dominates_pseudo_regret(pulls in proptest::collection::vec(0usize..3, 1..=120)) {
            let inst = rising();
            let traj = pseudo_regret(&inst, &pulls).unwrap();
            let mut counts = [0usize; 3];
            for &a in &pulls { counts[a] += 1; }
            let est = wald_upper_estimate(&inst, &counts).unwrap();
            let last = *traj.last().unwrap();
            prop_assert!(last <= est + 1e-9 * est.abs().max(1.0), "{} > {}", last, est);
        }
    }
}
