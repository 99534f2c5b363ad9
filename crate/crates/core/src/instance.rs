//! SRRB instances: arms, horizon and the cached mean tables that every
//! analytic and the regret accounting read from.

use serde::{Deserialize, Serialize};

use crate::curve::RewardCurve;
use crate::error::{Error, Result};
use crate::law::RewardLaw;

/// One arm: an expected-reward curve plus the law rewards are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    #[serde(flatten)]
    pub curve: RewardCurve,
    #[serde(flatten)]
    pub law: RewardLaw,
}

impl Arm {
    pub fn new(curve: RewardCurve, law: RewardLaw) -> Self {
        Arm { curve, law }
    }

    pub fn bernoulli(curve: RewardCurve) -> Self {
        Arm { curve, law: RewardLaw::Bernoulli }
    }
}

/// The serialized form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub horizon: usize,
    pub arms: Vec<Arm>,
}

/// A validated SRRB over a fixed horizon `T`.
///
/// `means[i][n-1] = μ_i(n)` and `prefix[i][t] = Σ_{l≤t} μ_i(l)` are built
/// eagerly for `n, t ∈ [1, T]`; the instance is immutable afterwards.
#[derive(Debug, Clone)]
pub struct Instance {
    arms: Vec<Arm>,
    horizon: usize,
    means: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
    /// Arms whose mean is the same at every pull on the horizon; their
    /// averages are reported as that value exactly.
    flat: Vec<bool>,
    optimal: usize,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.arms == other.arms && self.horizon == other.horizon
    }
}

impl Instance {
    pub fn new(arms: Vec<Arm>, horizon: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one arm".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidInstance("horizon must be positive".into()));
        }
        let mut means = Vec::with_capacity(arms.len());
        let mut prefix = Vec::with_capacity(arms.len());
        for (i, arm) in arms.iter().enumerate() {
            arm.curve.validate()?;
            arm.law.validate()?;
            let mut m = Vec::with_capacity(horizon);
            let mut p = Vec::with_capacity(horizon + 1);
            p.push(0.0);
            // Neumaier-compensated running sum
            let (mut acc, mut comp) = (0.0f64, 0.0f64);
            for n in 1..=horizon {
                let v = arm.curve.eval(n);
                if !arm.law.admits_mean(v) {
                    return Err(Error::InvalidInstance(format!(
                        "arm {i}: mean {v} at pull {n} is outside the support allowed by {:?}",
                        arm.law
                    )));
                }
                if let Some(&prev) = m.last() {
                    if v < prev {
                        return Err(Error::InvalidInstance(format!(
                            "arm {i}: expected reward decreases at pull {n} ({prev} -> {v})"
                        )));
                    }
                }
                let next = acc + v;
                comp += if acc.abs() >= v.abs() { (acc - next) + v } else { (v - next) + acc };
                acc = next;
                m.push(v);
                p.push(acc + comp);
            }
            means.push(m);
            prefix.push(p);
        }
        let flat: Vec<bool> = means.iter().map(|m: &Vec<f64>| m[0] == m[horizon - 1]).collect();
        let optimal = unique_argmax((0..arms.len()).map(|i| if flat[i] { means[i][0] } else { prefix[i][horizon] / horizon as f64 }))?;
        Ok(Instance { arms, horizon, means, prefix, flat, optimal })
    }

    pub fn from_spec(spec: InstanceSpec) -> Result<Self> {
        Self::new(spec.arms, spec.horizon)
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec { horizon: self.horizon, arms: self.arms.clone() }
    }

    /// Same arms, different horizon (re-validates, re-caches).
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        Self::new(self.arms.clone(), horizon)
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `i*(T)`.
    pub fn optimal_arm(&self) -> usize {
        self.optimal
    }

    pub fn suboptimal_arms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.arms.len()).filter(move |&i| i != self.optimal)
    }

    pub(crate) fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(Error::ArmOutOfRange { arm, arms: self.arms.len() });
        }
        Ok(())
    }

    fn check_round(&self, t: usize, lo: usize) -> Result<()> {
        if t < lo || t > self.horizon {
            return Err(Error::RoundOutOfRange { round: t, lo, hi: self.horizon });
        }
        Ok(())
    }

    /// `μ_i(n)` from the cache, `n ∈ [1, T]`.
    pub fn mu(&self, arm: usize, n: usize) -> Result<f64> {
        self.check_arm(arm)?;
        self.check_round(n, 1)?;
        Ok(self.means[arm][n - 1])
    }

    /// Unchecked cache read used on hot paths.
    #[inline]
    pub(crate) fn mu_unchecked(&self, arm: usize, n: usize) -> f64 {
        self.means[arm][n - 1]
    }

    /// Prefix sum `Σ_{l≤t} μ_i(l)`, `t ∈ [0, T]`.
    #[inline]
    #[allow(dead_code)]
    pub(crate) fn prefix_unchecked(&self, arm: usize, t: usize) -> f64 {
        self.prefix[arm][t]
    }

    /// `μ̄_i(t)` without bounds checks.
    #[inline]
    pub(crate) fn avg_unchecked(&self, arm: usize, t: usize) -> f64 {
        if self.flat[arm] {
            self.means[arm][0]
        } else {
            self.prefix[arm][t] / t as f64
        }
    }

    /// `μ̄_i(t; τ)` without bounds checks.
    #[inline]
    pub(crate) fn windowed_avg_unchecked(&self, arm: usize, t: usize, window: usize) -> f64 {
        if self.flat[arm] {
            self.means[arm][0]
        } else if window == 1 {
            self.means[arm][t - 1]
        } else if window == t {
            self.avg_unchecked(arm, t)
        } else {
            (self.prefix[arm][t] - self.prefix[arm][t - window]) / window as f64
        }
    }

    /// `μ̄_i(t) = (1/t) Σ_{l=1}^t μ_i(l)`.
    pub fn avg_mu(&self, arm: usize, t: usize) -> Result<f64> {
        self.check_arm(arm)?;
        self.check_round(t, 1)?;
        Ok(self.avg_unchecked(arm, t))
    }

    /// `μ̄_i(t; τ) = (1/τ) Σ_{l=t−τ+1}^t μ_i(l)`; needs a full window, `t ≥ τ ≥ 1`.
    pub fn windowed_avg_mu(&self, arm: usize, t: usize, window: usize) -> Result<f64> {
        self.check_arm(arm)?;
        if window == 0 {
            return Err(Error::OutOfRange("window must be at least 1".into()));
        }
        self.check_round(t, window)?;
        Ok(self.windowed_avg_unchecked(arm, t, window))
    }
}

fn unique_argmax(values: impl Iterator<Item = f64>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut tie: Option<(usize, usize)> = None;
    for (i, v) in values.enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b => {
                best = Some((i, v));
                tie = None;
            }
            Some((j, b)) if v == b => {
                tie.get_or_insert((j, i));
            }
            _ => {}
        }
    }
    if let Some((a, b)) = tie {
        return Err(Error::NonUniqueOptimum(a, b));
    }
    Ok(best.map(|(i, _)| i).unwrap_or(0))
}

/// Free-function forms mirroring the operation names.
pub fn avg_mu(instance: &Instance, arm: usize, t: usize) -> Result<f64> {
    instance.avg_mu(arm, t)
}

pub fn windowed_avg_mu(instance: &Instance, arm: usize, t: usize, window: usize) -> Result<f64> {
    instance.windowed_avg_mu(arm, t, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stationary(a: f64, b: f64, horizon: usize) -> Instance {
        Instance::new(
            vec![Arm::bernoulli(RewardCurve::constant(a)), Arm::bernoulli(RewardCurve::constant(b))],
            horizon,
        )
        .unwrap()
    }

    fn lower_bound_curve(cap: f64) -> RewardCurve {
        RewardCurve::LinearCapped { slope: 1.0 / 8.0, cap, offset: 1.0 }
    }

    #[test]
    fn constant_average() {
        let inst = stationary(0.3, 0.2, 50);
        for t in 1..=50 {
            assert_eq!(inst.avg_mu(0, t).unwrap(), 0.3);
        }
    }

    #[test]
    fn lower_bound_averages_match_prefix_summation() {
        let inst = Instance::new(
            vec![Arm::bernoulli(lower_bound_curve(0.5)), Arm::bernoulli(lower_bound_curve(0.25))],
            100,
        )
        .unwrap();
        // direct summation: Σ_{n=1}^{100} min((n-1)/8, 1/2) = 48.75
        assert!((inst.avg_mu(0, 100).unwrap() - 0.4875).abs() < 1e-15);
        assert!((inst.avg_mu(1, 100).unwrap() - 0.24625).abs() < 1e-15);
        assert_eq!(inst.optimal_arm(), 0);
    }

    #[test]
    fn windowed_average() {
        let values: Vec<f64> = (1..=10).map(|n| n as f64 / 10.0).collect();
        let inst = Instance::new(vec![Arm::bernoulli(RewardCurve::tabulated(values))], 10).unwrap();
        assert!((inst.windowed_avg_mu(0, 5, 2).unwrap() - 0.45).abs() < 1e-15);
        for t in 1..=10 {
            assert_eq!(inst.windowed_avg_mu(0, t, t).unwrap(), inst.avg_mu(0, t).unwrap());
        }
        assert!(inst.windowed_avg_mu(0, 3, 4).is_err());
        assert!(inst.windowed_avg_mu(0, 3, 0).is_err());
    }

    #[test]
    fn rejects_round_zero_and_ties() {
        let inst = stationary(0.6, 0.5, 10);
        assert!(inst.avg_mu(0, 0).is_err());
        assert!(inst.avg_mu(0, 11).is_err());
        assert!(inst.avg_mu(2, 1).is_err());
        let tie = Instance::new(
            vec![Arm::bernoulli(RewardCurve::constant(0.5)), Arm::bernoulli(RewardCurve::constant(0.5))],
            10,
        );
        assert_eq!(tie.unwrap_err(), Error::NonUniqueOptimum(0, 1));
    }

    #[test]
    fn rejects_out_of_support_means() {
        let r = Instance::new(vec![Arm::bernoulli(RewardCurve::constant(1.2))], 5);
        assert!(matches!(r, Err(Error::InvalidInstance(_))));
        let r = Instance::new(vec![Arm::new(RewardCurve::constant(0.95), RewardLaw::bounded_uniform(0.1))], 5);
        assert!(matches!(r, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn spec_round_trip_through_json() {
        let inst = stationary(0.6, 0.5, 10);
        let s = serde_json::to_string(&inst.to_spec()).unwrap();
        assert!(s.contains(r#""family":"constant""#) && s.contains(r#""law":"bernoulli""#));
        let back: InstanceSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(Instance::from_spec(back).unwrap(), inst);
    }
}
