//! Ready-made instances: the two-instance lower-bound construction, the
//! two rising comparison instances, stationary Bernoulli bandits, the
//! seeded 15-arm generator and the forced-exploration sensitivity instance.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::Sigma;
use crate::curve::RewardCurve;
use crate::error::{Error, Result};
use crate::instance::{Arm, Instance};
use crate::law::RewardLaw;

/// Arm boosted to cap 1 in the alternative instance.
pub const BOOSTED_ARM: usize = 1;

/// The pair `(μ, μ′)` of deterministic instances behind the
/// `K(σ̄ − 2)/64` worst-case regret bound over `M_σ̄`.
#[derive(Debug, Clone)]
pub struct LowerBoundPair {
    pub mu: Instance,
    pub mu_prime: Instance,
    pub bound: f64,
    pub sigma_bar: usize,
}

/// Ramp `min((n−1)/(σ̄−2), cap)`; the step `0, cap, cap, …` when `σ̄ = 2`.
fn ramp(sigma_bar: usize, cap: f64) -> RewardCurve {
    if sigma_bar == 2 {
        RewardCurve::tabulated(vec![0.0, cap])
    } else {
        RewardCurve::LinearCapped { slope: 1.0 / (sigma_bar - 2) as f64, cap, offset: 1.0 }
    }
}

fn check_lower_bound_args(arms: usize, sigma_bar: usize, horizon: usize) -> Result<()> {
    if arms < 2 {
        return Err(Error::OutOfRange(format!("the lower-bound construction needs K >= 2, got {arms}")));
    }
    if sigma_bar < 2 || 2 * sigma_bar + 1 > horizon {
        return Err(Error::OutOfRange(format!(
            "sigma_bar must lie in [2, (T-1)/2] = [2, {}], got {sigma_bar}",
            horizon.saturating_sub(1) / 2
        )));
    }
    Ok(())
}

/// Builds `μ` (arm 0 capped at 1/2, the rest at 1/4) and `μ′` (same, with
/// arm [`BOOSTED_ARM`] capped at 1), checks both lie in `M_σ̄`.
pub fn lower_bound_instances(arms: usize, sigma_bar: usize, horizon: usize) -> Result<LowerBoundPair> {
    check_lower_bound_args(arms, sigma_bar, horizon)?;
    let build = |boost: bool| {
        let curves = (0..arms).map(|i| {
            let cap = match i {
                0 => 0.5,
                BOOSTED_ARM if boost => 1.0,
                _ => 0.25,
            };
            Arm::new(ramp(sigma_bar, cap), RewardLaw::deterministic())
        });
        Instance::new(curves.collect(), horizon)
    };
    let mu = build(false)?;
    let mu_prime = build(true)?;
    for (name, inst) in [("mu", &mu), ("mu_prime", &mu_prime)] {
        let s = inst.sigma_mu();
        if s > Sigma::Finite(sigma_bar) {
            return Err(Error::InvalidInstance(format!(
                "{name} has sigma_mu = {s} > sigma_bar = {sigma_bar} at T = {horizon}"
            )));
        }
    }
    Ok(LowerBoundPair { mu, mu_prime, bound: arms as f64 * (sigma_bar - 2) as f64 / 64.0, sigma_bar })
}

/// Exact arithmetic view of the lower-bound construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// `min_{i≠0} Δ̄_{i,μ}(T, T)`.
    pub min_gap_mu: Rational64,
    /// `min_{i≠1} Δ̄_{i,μ′}(T, T)`.
    pub min_gap_mu_prime: Rational64,
    pub sigma_mu: usize,
    pub sigma_mu_prime: usize,
}

impl LowerBoundCheck {
    pub fn gaps_hold(&self) -> bool {
        self.min_gap_mu >= Rational64::new(5, 32) && self.min_gap_mu_prime >= Rational64::new(1, 8)
    }
}

/// Recomputes the gap constants and `σ_μ` of both instances in integer
/// arithmetic. Every mean is scaled by `4·max(σ̄−2, 1)`, which makes all
/// curve values integers; comparisons of averages cross-multiply in `i128`.
pub fn lower_bound_check_exact(arms: usize, sigma_bar: usize, horizon: usize) -> Result<LowerBoundCheck> {
    check_lower_bound_args(arms, sigma_bar, horizon)?;
    let d = sigma_bar as i64 - 2;
    let scale = 4 * d.max(1);
    // caps 1/4, 1/2, 1 as multiples of 1/4
    let prefix = |quarters: i64| -> Vec<i64> {
        let mut p = vec![0i64; horizon + 1];
        for n in 1..=horizon {
            let v = if n == 1 {
                0
            } else if d == 0 {
                quarters
            } else {
                (4 * (n as i64 - 1)).min(quarters * d)
            };
            p[n] = p[n - 1] + v;
        }
        p
    };
    let (low, mid, high) = (prefix(1), prefix(2), prefix(4));
    let t = horizon as i128;
    let sigma = |best: &[i64], other: &[i64]| -> usize {
        let target = other[horizon] as i128;
        (1..=horizon)
            .find(|&l| best[l] as i128 * t > target * l as i128)
            .unwrap_or(usize::MAX)
    };
    let gap = |best: &[i64], other: &[i64]| Rational64::new(best[horizon] - other[horizon], scale * horizon as i64);
    // arms beyond the designated ones all share the 1/4 curve, so K only
    // matters through which curves are present
    let (gap_mu, sigma_mu) = (gap(&mid, &low), sigma(&mid, &low));
    let mut gap_prime = gap(&high, &mid);
    let mut sigma_prime = sigma(&high, &mid);
    if arms > 2 {
        gap_prime = gap_prime.min(gap(&high, &low));
        sigma_prime = sigma_prime.max(sigma(&high, &low));
    }
    Ok(LowerBoundCheck { min_gap_mu: gap_mu, min_gap_mu_prime: gap_prime, sigma_mu, sigma_mu_prime: sigma_prime })
}

/// Two arms, `μ_1(n) = 1 − 2^{−n}` and `μ_2(n) = 1 − 4^{1−n}`.
pub fn rising_comparison_first(horizon: usize) -> Result<Instance> {
    let second: Vec<f64> = (1..=30).map(|n| 1.0 - 4f64.powi(1 - n)).collect();
    Instance::new(
        vec![
            Arm::bernoulli(RewardCurve::Exponential { c: 1.0, a: std::f64::consts::LN_2 }),
            Arm::bernoulli(RewardCurve::tabulated(second)),
        ],
        horizon,
    )
}

/// Two arms, `μ_1(n) = 1 − 2^{λ−1}/(n+1)^λ` and
/// `μ_2(n) = 1/2 − 2^{λ−1}/(n+1)^λ`, tabulated over the horizon.
pub fn rising_comparison_second(lambda: f64, horizon: usize) -> Result<Instance> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::OutOfRange(format!("lambda must lie in (0,1], got {lambda}")));
    }
    let decay = |n: usize| 2f64.powf(lambda - 1.0) / ((n + 1) as f64).powf(lambda);
    let first = (1..=horizon).map(|n| 1.0 - decay(n)).collect();
    let second = (1..=horizon).map(|n| (0.5 - decay(n)).max(0.0)).collect();
    Instance::new(
        vec![Arm::bernoulli(RewardCurve::tabulated(first)), Arm::bernoulli(RewardCurve::tabulated(second))],
        horizon,
    )
}

pub fn stationary_bernoulli(means: &[f64], horizon: usize) -> Result<Instance> {
    Instance::new(means.iter().map(|&m| Arm::bernoulli(RewardCurve::constant(m))).collect(), horizon)
}

/// Random rising instance with Bernoulli arms drawn from the exponential
/// and polynomial families.
///
/// Each arm is exponential or polynomial with probability 1/2, with
/// `c ~ U[0.3, 1]`, `a` log-uniform on `[1e-4, 1e-2]`, `b ~ U[1, 50]` and
/// `ρ ~ U[0.2, 1]`. Draws are repeated in the (measure-zero) event of a tie
/// for the optimum.
pub fn random_rising(arms: usize, horizon: usize, seed: u64) -> Result<Instance> {
    if arms == 0 {
        return Err(Error::OutOfRange("need at least one arm".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let curves = (0..arms)
            .map(|_| {
                let c = rng.random_range(0.3..=1.0);
                if rng.random_bool(0.5) {
                    let a = 10f64.powf(rng.random_range(-4.0..=-2.0));
                    RewardCurve::Exponential { c, a }
                } else {
                    RewardCurve::Polynomial { c, b: rng.random_range(1.0..=50.0), rho: rng.random_range(0.2..=1.0) }
                }
            })
            .map(Arm::bernoulli)
            .collect();
        match Instance::new(curves, horizon) {
            Err(Error::NonUniqueOptimum(..)) => continue,
            other => return other,
        }
    }
}

/// Two Bernoulli arms where the eventually-best arm starts behind: arm 0
/// rises linearly `0.3 → 1` (saturating near pull `3500`), arm 1 is a
/// constant `0.5`. The optimal arm's average overtakes `0.5` only at pull
/// `≈ 2000`, so without forced exploration Thompson sampling tends to
/// settle on arm 1.
pub fn late_bloomer(horizon: usize) -> Result<Instance> {
    let slope = 0.4 / 1999.0;
    let start = 0.3;
    Instance::new(
        vec![
            Arm::bernoulli(RewardCurve::LinearCapped { slope, cap: 1.0, offset: 1.0 - start / slope }),
            Arm::bernoulli(RewardCurve::constant(0.5)),
        ],
        horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_value() {
        let pair = lower_bound_instances(15, 10, 100).unwrap();
        assert!((pair.bound - 1.875).abs() < 1e-15);
        let pair = lower_bound_instances(15, 2, 100).unwrap();
        assert_eq!(pair.bound, 0.0);
        assert_eq!(pair.mu.optimal_arm(), 0);
        assert_eq!(pair.mu_prime.optimal_arm(), BOOSTED_ARM);
    }

    #[test]
    fn lower_bound_rejects_range() {
        assert!(lower_bound_instances(15, 1, 100).is_err());
        assert!(lower_bound_instances(15, 50, 100).is_err());
        assert!(lower_bound_instances(1, 10, 100).is_err());
        assert!(lower_bound_instances(15, 49, 99).is_ok());
    }

    #[test]
    fn lower_bound_curve_matches_closed_form() {
        // σ̄ = 10: internal σ = 4, μ_1(n) = min((n−1)/8, 1/2)
        let pair = lower_bound_instances(3, 10, 100).unwrap();
        assert_eq!(pair.mu.mu(0, 5).unwrap(), 0.5);
        let avg = pair.mu.avg_mu(0, 100).unwrap();
        assert!((avg - (0.5 - 5.0 / 400.0)).abs() < 1e-15);
        let avg = pair.mu.avg_mu(1, 100).unwrap();
        assert!((avg - (0.25 - 3.0 / 800.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_check_agrees_with_float_route() {
        for sigma_bar in [2usize, 3, 4, 7, 10, 25] {
            for horizon in [2 * sigma_bar + 1, 2 * sigma_bar + 7, 200] {
                let exact = lower_bound_check_exact(4, sigma_bar, horizon).unwrap();
                assert!(exact.gaps_hold(), "{sigma_bar} {horizon}: {exact:?}");
                let pair = lower_bound_instances(4, sigma_bar, horizon).unwrap();
                assert_eq!(pair.mu.sigma_mu(), Sigma::Finite(exact.sigma_mu));
                assert_eq!(pair.mu_prime.sigma_mu(), Sigma::Finite(exact.sigma_mu_prime));
                let g = pair.mu.gaps(1, horizon, horizon).unwrap().delta_bar;
                let e = *exact.min_gap_mu.numer() as f64 / *exact.min_gap_mu.denom() as f64;
                assert!((g - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_comparison_instance() {
        let inst = rising_comparison_first(1000).unwrap();
        assert_eq!(inst.optimal_arm(), 0);
        assert!((inst.mu(0, 3).unwrap() - 0.875).abs() < 1e-15);
        assert_eq!(inst.mu(1, 2).unwrap(), 0.75);
        assert_eq!(inst.mu(1, 500).unwrap(), 1.0);
    }

    #[test]
    fn second_comparison_instance_gap_at_two() {
        for horizon in [10usize, 100, 1000] {
            let inst = rising_comparison_second(0.5, horizon).unwrap();
            assert_eq!(inst.optimal_arm(), 0);
            let g = inst.gaps(1, 2, horizon).unwrap();
            assert!(g.delta_bar > 0.0);
            assert!(inst.avg_mu(0, 2).unwrap() > 0.5 && inst.avg_mu(1, horizon).unwrap() <= 0.5);
            // μ_1(1) = 1/2 already beats μ̄_2(T) < 1/2
            assert_eq!(inst.sigma_mu(), Sigma::Finite(1));
            assert!(inst.bound_terms(2, 0, crate::analysis::BoundFlavor::Gauss, 1.0, 0.5).is_ok());
        }
    }

    #[test]
    fn random_rising_is_reproducible() {
        let a = random_rising(15, 500, 7).unwrap();
        let b = random_rising(15, 500, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_rising(15, 500, 8).unwrap());
        for arm in a.arms() {
            arm.curve.validate().unwrap();
        }
    }

    #[test]
    fn late_bloomer_complexity() {
        let inst = late_bloomer(20_000).unwrap();
        assert_eq!(inst.optimal_arm(), 0);
        assert!((inst.mu(0, 1).unwrap() - 0.3).abs() < 1e-12);
        let s = inst.sigma_mu().finite().unwrap();
        assert!((1990..=2010).contains(&s), "{s}");
    }
}
