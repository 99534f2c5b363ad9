//! Instance analytics: suboptimality gaps, the complexity indices `σ_i(T)`,
//! `σ_μ(T)` and their windowed analogues, the growth index `Υ(M, q)`, and
//! the three terms of the expected-pull bounds for the Beta and Gaussian
//! Thompson-sampling variants.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::{bernoulli_kl, erfc, BoundCalcScratch};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::law::RewardLaw;

/// A pull index that may be `+∞` (no witness on the horizon).
///
/// Serialized as a JSON integer, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sigma {
    Finite(usize),
    Infinite,
}

impl Sigma {
    pub fn finite(self) -> Option<usize> {
        match self {
            Sigma::Finite(v) => Some(v),
            Sigma::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Sigma::Finite(_))
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::Finite(v) => write!(f, "{v}"),
            Sigma::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Sigma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sigma::Finite(v) => s.serialize_u64(*v as u64),
            Sigma::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Sigma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Sigma::Finite(v as usize)),
            Raw::Str(s) if s == "inf" => Ok(Sigma::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected integer or \"inf\", got {s:?}"))),
        }
    }
}

/// `Δ_i(n, n′)` and `Δ̄_i(n, n′)`, both clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub delta: f64,
    pub delta_bar: f64,
}

/// Per-arm `σ_i(T)` (`None` for the optimal arm) and `σ_μ(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub horizon: usize,
    pub optimal_arm: usize,
    pub per_arm: Vec<Option<Sigma>>,
    pub sigma_mu: Sigma,
}

/// `σ′_i(T; τ)` and `Δ′_i(T; τ)` for one suboptimal arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedComplexity {
    pub arm: usize,
    pub sigma_prime: Sigma,
    pub delta_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlavor {
    Beta,
    Gauss,
}

/// Terms (i), (ii), (iii) of the expected-pull bound for one suboptimal arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub arm: usize,
    pub forced_exploration: f64,
    pub stationary: f64,
    pub dissimilarity: f64,
    /// Set when (iii) was replaced by its `δ_TV = 1` upper bound.
    pub dissimilarity_trivial: bool,
}

impl Instance {
    pub fn gaps(&self, arm: usize, n: usize, n_prime: usize) -> Result<Gaps> {
        self.check_arm(arm)?;
        let opt = self.optimal_arm();
        if arm == opt {
            return Err(Error::OptimalArm(arm));
        }
        Ok(Gaps {
            delta: (self.mu(opt, n)? - self.mu(arm, n_prime)?).max(0.0),
            delta_bar: (self.avg_mu(opt, n)? - self.avg_mu(arm, n_prime)?).max(0.0),
        })
    }

    /// `σ_i(T) = min{l ∈ [T] : μ̄_{i*}(l) > μ̄_i(T)}` for every suboptimal
    /// arm, and their maximum `σ_μ(T)`. Strict comparison, no tolerance.
    pub fn sigma(&self) -> SigmaReport {
        let t_max = self.horizon();
        let opt = self.optimal_arm();
        let per_arm: Vec<Option<Sigma>> = (0..self.num_arms())
            .map(|i| {
                if i == opt {
                    return None;
                }
                let target = self.avg_unchecked(i, t_max);
                let witness = (1..=t_max).find(|&l| self.avg_unchecked(opt, l) > target);
                debug_assert!(witness.is_some(), "unique optimum guarantees a witness at l = T");
                Some(witness.map_or(Sigma::Infinite, Sigma::Finite))
            })
            .collect();
        let sigma_mu = per_arm.iter().flatten().copied().max().unwrap_or(Sigma::Finite(0));
        SigmaReport { horizon: t_max, optimal_arm: opt, per_arm, sigma_mu }
    }

    pub fn sigma_mu(&self) -> Sigma {
        self.sigma().sigma_mu
    }

    /// Membership in `M_σ̄ = {μ : σ_μ(T) ≤ σ̄}`.
    pub fn in_complexity_class(&self, sigma_bar: usize) -> bool {
        self.sigma_mu() <= Sigma::Finite(sigma_bar)
    }

    /// `σ′_i(T;τ) = min{l ≥ τ : μ̄_{i*}(l;τ) > μ_i(T)}` (else `+∞`) and
    /// `Δ′_i(T;τ) = μ̄_{i*}(σ′;τ) − μ_i(T)` when `σ′` is finite.
    pub fn sigma_prime(&self, window: usize) -> Result<Vec<WindowedComplexity>> {
        let t_max = self.horizon();
        if window == 0 || window > t_max {
            return Err(Error::OutOfRange(format!("window {window} outside [1, {t_max}]")));
        }
        let opt = self.optimal_arm();
        let windowed = |l: usize| self.windowed_avg_unchecked(opt, l, window);
        Ok(self
            .suboptimal_arms()
            .map(|i| {
                let target = self.mu_unchecked(i, t_max);
                match (window..=t_max).find(|&l| windowed(l) > target) {
                    Some(l) => WindowedComplexity {
                        arm: i,
                        sigma_prime: Sigma::Finite(l),
                        delta_prime: Some(windowed(l) - target),
                    },
                    None => WindowedComplexity { arm: i, sigma_prime: Sigma::Infinite, delta_prime: None },
                }
            })
            .collect())
    }

    /// `Υ(M, q) = Σ_{l=1}^{M−1} max_i γ_i(l)^q`, with `0^q = 0` for `q > 0`
    /// and `0^0 = 1`. Evaluates the curves directly, so `M` may exceed `T`.
    pub fn upsilon(&self, m: usize, q: f64) -> Result<f64> {
        if m < 2 {
            return Err(Error::OutOfRange(format!("upsilon needs M >= 2, got {m}")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange(format!("upsilon needs q in [0,1], got {q}")));
        }
        let mut total = 0.0;
        for l in 1..m {
            let step = self
                .arms()
                .iter()
                .map(|a| a.curve.increment(l).max(0.0).powf(q))
                .fold(0.0f64, f64::max);
            total += step;
        }
        Ok(total)
    }

    /// Terms (i)–(iii) of the expected-pull bound of every suboptimal arm
    /// at reference pull count `sigma ∈ [σ_μ(T), T]`.
    ///
    /// Cost is `O(σ²)` for term (iii).
    pub fn bound_terms(
        &self,
        sigma: usize,
        forced: usize,
        flavor: BoundFlavor,
        precision: f64,
        epsilon: f64,
    ) -> Result<Vec<BoundTerms>> {
        let t_max = self.horizon();
        let sigma_mu = self.sigma_mu().finite().unwrap_or(usize::MAX);
        if sigma < sigma_mu.max(1) {
            return Err(Error::SigmaBelowComplexity { sigma, sigma_mu });
        }
        if sigma > t_max {
            return Err(Error::OutOfRange(format!("sigma {sigma} exceeds the horizon {t_max}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::OutOfRange(format!("epsilon must lie in (0,1], got {epsilon}")));
        }
        if flavor == BoundFlavor::Gauss && precision <= 0.0 {
            return Err(Error::OutOfRange(format!("precision must be positive, got {precision}")));
        }
        let opt = self.optimal_arm();
        let bernoulli = self.arms().iter().all(|a| a.law == RewardLaw::Bernoulli);
        if flavor == BoundFlavor::Beta && !bernoulli {
            return Err(Error::OutOfRange("the Beta bound needs Bernoulli rewards on every arm".into()));
        }
        let reference = self.avg_unchecked(opt, sigma);
        let horizon_ln = (t_max as f64).ln();

        let (dissimilarity, trivial) = match flavor {
            BoundFlavor::Beta => (self.beta_dissimilarity(forced, sigma, reference), false),
            BoundFlavor::Gauss => self.gauss_dissimilarity(forced, sigma, reference, precision),
        };

        Ok(self
            .suboptimal_arms()
            .map(|i| {
                let avg_i = self.avg_unchecked(i, t_max);
                let stationary = match flavor {
                    BoundFlavor::Beta => {
                        (1.0 + epsilon) * horizon_ln / bernoulli_kl(avg_i, reference) + 1.0 / (epsilon * epsilon)
                    }
                    BoundFlavor::Gauss => {
                        let gap = (reference - avg_i).max(0.0);
                        let g2 = gap * gap;
                        if g2 == 0.0 {
                            f64::INFINITY
                        } else {
                            (t_max as f64 * g2 + 6f64.exp()).ln() / (precision * g2)
                        }
                    }
                };
                BoundTerms {
                    arm: i,
                    forced_exploration: forced as f64,
                    stationary,
                    dissimilarity,
                    dissimilarity_trivial: trivial,
                }
            })
            .collect())
    }

    /// `Σ_{j=Γ}^{σ−1} δ_TV(Bin(j, μ̄*(j)), Bin(j, μ̄*(σ))) / (1 − μ̄*(σ))^{j+1}`.
    fn beta_dissimilarity(&self, forced: usize, sigma: usize, reference: f64) -> f64 {
        let opt = self.optimal_arm();
        let mut scratch = BoundCalcScratch::new();
        let mut total = 0.0;
        for j in forced.max(1)..sigma {
            let avg_j = self.avg_unchecked(opt, j);
            let tv = scratch.binomial_tv(j as u64, avg_j, reference);
            if tv > 0.0 {
                total += tv / (1.0 - reference).powi(j as i32 + 1);
            }
        }
        total
    }

    /// `Σ_{j=Γ}^{σ−1} δ_TV(P_j, Q_j) / erfc(√(γj/2) μ̄*(σ))` with `P_j` the
    /// law of the first `j` rewards' sum (Poisson-Binomial) and `Q_j` the
    /// `Bin(j, μ̄*(σ))` law. Falls back to `δ_TV = 1` for non-Bernoulli
    /// optimal arms.
    fn gauss_dissimilarity(&self, forced: usize, sigma: usize, reference: f64, precision: f64) -> (f64, bool) {
        let opt = self.optimal_arm();
        let denom = |j: usize| erfc((precision * j as f64 / 2.0).sqrt() * reference);
        if self.arms()[opt].law != RewardLaw::Bernoulli {
            let total = (forced.max(1)..sigma).map(|j| 1.0 / denom(j)).sum();
            return (total, true);
        }
        let mut scratch = BoundCalcScratch::new();
        // pmf of the first j rewards' success count, extended one pull at a time
        let mut pmf = vec![1.0];
        let mut total = 0.0;
        for j in 1..sigma {
            let p = self.mu_unchecked(opt, j);
            pmf.push(0.0);
            for s in (1..=j).rev() {
                pmf[s] = pmf[s] * (1.0 - p) + pmf[s - 1] * p;
            }
            pmf[0] *= 1.0 - p;
            if j >= forced {
                let tv = scratch.tv_against_binomial(&pmf, reference);
                if tv > 0.0 {
                    total += tv / denom(j);
                }
            }
        }
        (total, false)
    }
}

/// `σ_i(T)` / `σ_μ(T)` at an arbitrary horizon `T` (rebuilds the cache
/// when `T` differs from the instance's own horizon).
pub fn sigma(instance: &Instance, horizon: usize) -> Result<SigmaReport> {
    if horizon == instance.horizon() {
        Ok(instance.sigma())
    } else {
        Ok(instance.with_horizon(horizon)?.sigma())
    }
}

/// What to compute in [`analyze`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub windows: Vec<usize>,
    pub gap_points: Vec<GapPoint>,
    pub upsilon_q: Vec<f64>,
    /// `M` for `Υ(M, q)`; defaults to the horizon.
    pub upsilon_m: Option<usize>,
    pub bounds: Option<BoundRequest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub arm: usize,
    pub n: usize,
    pub n_prime: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub sigma: usize,
    pub forced: usize,
    pub flavor: BoundFlavor,
    pub precision: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: usize,
    pub arms: Vec<WindowedComplexity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub arm: usize,
    pub n: usize,
    pub n_prime: usize,
    #[serde(flatten)]
    pub gaps: Gaps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpsilonReport {
    pub m: usize,
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(flatten)]
    pub request: BoundRequest,
    pub terms: Vec<BoundTerms>,
}

/// Everything known about an instance at its horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub horizon: usize,
    pub optimal_arm: usize,
    pub average_rewards: Vec<f64>,
    pub sigma: Vec<Option<Sigma>>,
    pub sigma_mu: Sigma,
    pub windows: Vec<WindowReport>,
    pub gaps: Vec<GapReport>,
    pub upsilon: Vec<UpsilonReport>,
    pub bound_terms: Option<BoundReport>,
}

pub fn analyze(instance: &Instance, request: &AnalysisRequest) -> Result<AnalysisReport> {
    let t_max = instance.horizon();
    let sig = instance.sigma();
    let windows = request
        .windows
        .iter()
        .map(|&w| Ok(WindowReport { window: w, arms: instance.sigma_prime(w)? }))
        .collect::<Result<Vec<_>>>()?;
    let gaps = request
        .gap_points
        .iter()
        .map(|g| {
            Ok(GapReport { arm: g.arm, n: g.n, n_prime: g.n_prime, gaps: instance.gaps(g.arm, g.n, g.n_prime)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = request.upsilon_m.unwrap_or(t_max).max(2);
    let upsilon = request
        .upsilon_q
        .iter()
        .map(|&q| Ok(UpsilonReport { m, q, value: instance.upsilon(m, q)? }))
        .collect::<Result<Vec<_>>>()?;
    let bound_terms = request
        .bounds
        .map(|b| {
            Ok::<_, Error>(BoundReport {
                request: b,
                terms: instance.bound_terms(b.sigma, b.forced, b.flavor, b.precision, b.epsilon)?,
            })
        })
        .transpose()?;
    Ok(AnalysisReport {
        horizon: t_max,
        optimal_arm: sig.optimal_arm,
        average_rewards: (0..instance.num_arms()).map(|i| instance.avg_unchecked(i, t_max)).collect(),
        sigma: sig.per_arm,
        sigma_mu: sig.sigma_mu,
        windows,
        gaps,
        upsilon,
        bound_terms,
    })
}
