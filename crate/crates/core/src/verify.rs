//! Desk-scale property suites over the distribution numerics, the window
//! bookkeeping and the lower-bound arithmetic. Each suite counts checks and
//! violations and tracks the worst residual seen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{lower_bound_check_exact, rising_comparison_first};
use crate::dist::{beta_tail, binomial_pmf_vec, expect_inv_f, oracle, pb_pmf, roos_tv_bound, tv_distance, CountLaw};
use crate::error::Result;
use crate::policy::{Agent, Policy, PolicyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub violations: u64,
    /// Largest residual (suite-specific: relative excess, absolute error, …).
    pub worst_residual: f64,
    /// First violation, if any.
    pub example: Option<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), checks: 0, violations: 0, worst_residual: 0.0, example: None }
    }

    fn record(&mut self, residual: f64, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if residual > self.worst_residual || residual.is_nan() {
            self.worst_residual = residual;
        }
        if !ok {
            self.violations += 1;
            if self.example.is_none() {
                self.example = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checks > 0
    }
}

pub const LEMMA_SLACK: f64 = 1e-9;

/// `E_PB[1/F^B_{j+1,y}(S)] ≤ E_{Bin(j, mean)}[·] ≤ E_{Bin(j, x)}[·]` for
/// `j ∈ [1, max_j]`, `vectors` random probability vectors per `j`,
/// `y ∈ {0.1, …, 0.9}` and `x = k·mean/5`, `k = 0..=5`. Residual is the
/// relative excess of the left side over the right.
pub fn lemma_chain(max_j: usize, vectors: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lemma_chain");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    for j in 1..=max_j {
        for _ in 0..vectors {
            let probs: Vec<f64> = (0..j).map(|_| rng.random::<f64>()).collect();
            let mean = probs.iter().sum::<f64>() / j as f64;
            let pb = CountLaw::PoissonBinomial(probs.clone());
            for &y in &ys {
                let e_pb = expect_inv_f(&pb, y)?;
                let e_mean = expect_inv_f(&CountLaw::Binomial { trials: j, p: mean }, y)?;
                let mut check = |lhs: f64, rhs: f64, what: &str| {
                    let excess = (lhs - rhs) / rhs;
                    report.record(excess, lhs <= rhs * (1.0 + LEMMA_SLACK), || {
                        format!("{what}: j={j}, y={y}, probs={probs:?}: {lhs} > {rhs}")
                    });
                };
                check(e_pb, e_mean, "PB vs Bin(j, mean)");
                for k in 0..=5 {
                    let x = mean * k as f64 / 5.0;
                    let e_x = expect_inv_f(&CountLaw::Binomial { trials: j, p: x }, y)?;
                    check(e_mean, e_x, "Bin(j, mean) vs Bin(j, x)");
                }
            }
        }
    }
    Ok(report)
}

pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// `|P(Beta(α,β) > y) − (1 − F^B_{α+β−1,y}(α−1))|` against the continuous
/// incomplete-beta evaluation, over `α, β ∈ [1, max_param]` and
/// `y ∈ {0.05, 0.10, …, 0.95}`.
pub fn beta_binomial_identity(max_param: u64) -> SuiteReport {
    let mut report = SuiteReport::new("beta_binomial_identity");
    for alpha in 1..=max_param {
        for beta in 1..=max_param {
            for k in 1..=19 {
                let y = k as f64 * 0.05;
                let continuous = 1.0 - oracle::beta_cdf(alpha as f64, beta as f64, y);
                let discrete = beta_tail(alpha, beta, y);
                let residual = (continuous - discrete).abs();
                report.record(residual, residual <= IDENTITY_TOLERANCE, || {
                    format!("alpha={alpha}, beta={beta}, y={y}: {continuous} vs {discrete}")
                });
            }
        }
    }
    report
}

pub const ROOS_SLACK: f64 = 1e-12;

/// Roos' bound against the exact `δ_TV(PB(p), Bin(n, μ))` for random
/// `p` of length `1..=max_n` and random `μ`. Residual is the exact TV in
/// excess of the bound.
pub fn roos_domination(cases: usize, max_n: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("roos_domination");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(1..=max_n);
        let probs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        // half the cases compare against the matching mean, half against a random μ
        let mu = if case % 2 == 0 {
            (probs.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6)
        } else {
            rng.random_range(0.01..0.99)
        };
        let exact = tv_distance(&pb_pmf(&probs)?, &binomial_pmf_vec(n as u64, mu));
        let bound = roos_tv_bound(&probs, mu)?;
        report.record(exact - bound, bound >= exact - ROOS_SLACK, || {
            format!("probs={probs:?}, mu={mu}: bound {bound} < exact {exact}")
        });
    }
    Ok(report)
}

/// Drives policies on random Bernoulli traces and compares their window
/// aggregates with a recount from the history at every round, exactly.
/// Traces alternate between the Beta and the Gaussian sampler, each
/// choosing its own arms.
pub fn window_accounting(traces: usize, arms: usize, horizon: usize, windows: &[usize], seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("window_accounting");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trace in 0..traces {
        let means: Vec<f64> = (0..arms).map(|_| rng.random::<f64>()).collect();
        for &window in windows {
            let config = if trace % 2 == 0 {
                PolicyConfig::beta_swts(window).with_forced(trace % 3)
            } else {
                PolicyConfig::gamma_swgts(window)
            };
            let mut policy = Policy::new(config, arms, horizon, 0.25, rng.random())?;
            // prefix[t][i] = (pulls, successes) of arm i over rounds 1..=t
            let mut prefix = vec![vec![(0u64, 0u64); arms]];
            for t in 1..=horizon {
                let lo = t.saturating_sub(window).max(1);
                let mut mismatch = None;
                for i in 0..arms {
                    let n = prefix[t - 1][i].0 - prefix[lo - 1][i].0;
                    let s = prefix[t - 1][i].1 - prefix[lo - 1][i].1;
                    let got = policy.window_counts(i);
                    if got != (n as usize, s as f64) {
                        mismatch = Some((i, got, (n, s)));
                    }
                    if let Some(stamp) = policy.oldest_stamp(i) {
                        if stamp < lo {
                            mismatch = Some((i, got, (n, s)));
                        }
                    }
                }
                report.record(mismatch.is_some() as u8 as f64, mismatch.is_none(), || {
                    format!("trace {trace}, window {window}, round {t}: {mismatch:?}")
                });
                let arm = policy.select_arm(t)?;
                let hit = rng.random::<f64>() < means[arm];
                policy.update(arm, hit as u8 as f64, t)?;
                let mut row = prefix[t - 1].clone();
                row[arm].0 += 1;
                row[arm].1 += hit as u64;
                prefix.push(row);
            }
        }
    }
    Ok(report)
}

/// Exact lower-bound constants on the grid `σ̄ ∈ [2, max_sigma_bar]`,
/// `T ∈ [2σ̄+1, max_horizon]`: `Δ̄ ≥ 5/32` in `μ`, `Δ̄ ≥ 1/8` in `μ′`, and
/// `σ_μ(T) ≤ 2σ̄ + 2` for both. Residual is `max(σ_μ) − σ̄` (≤ 0 means the
/// tighter class `M_σ̄` also holds).
pub fn lower_bound_grid(arms: usize, max_sigma_bar: usize, max_horizon: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lower_bound_grid");
    report.worst_residual = f64::NEG_INFINITY;
    for sigma_bar in 2..=max_sigma_bar {
        for horizon in 2 * sigma_bar + 1..=max_horizon {
            let c = lower_bound_check_exact(arms, sigma_bar, horizon)?;
            let worst_sigma = c.sigma_mu.max(c.sigma_mu_prime);
            let ok = c.gaps_hold() && worst_sigma <= 2 * sigma_bar + 2;
            report.record(worst_sigma as f64 - sigma_bar as f64, ok, || {
                format!("sigma_bar={sigma_bar}, T={horizon}: {c:?}")
            });
        }
    }
    Ok(report)
}

/// `max_{σ≤T} Δ̄(σ, T) ≤ 5/(6T)` on the first rising comparison instance.
/// Residual is `T · max Δ̄`, to be compared with `5/6`.
pub fn rising_comparison_gap(horizons: &[usize]) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("rising_comparison_gap");
    for &horizon in horizons {
        let inst = rising_comparison_first(horizon)?;
        let mut worst = 0.0f64;
        for sigma in 1..=horizon {
            worst = worst.max(inst.gaps(1, sigma, horizon)?.delta_bar);
        }
        let scaled = worst * horizon as f64;
        report.record(scaled, worst <= 5.0 / (6.0 * horizon as f64), || {
            format!("T={horizon}: max gap {worst} > 5/(6T)")
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Windows,
    Identities,
    All,
}

/// The suites behind `verify`, at their documented sizes.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        out.push(lemma_chain(10, 200, seed)?);
        out.push(roos_domination(500, 12, seed)?);
    }
    if matches!(suite, Suite::Windows | Suite::All) {
        out.push(window_accounting(100, 5, 2000, &[1, 7, 64, 2000], seed)?);
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        out.push(beta_binomial_identity(50));
        out.push(lower_bound_grid(15, 50, 1000)?);
        out.push(rising_comparison_gap(&[10, 100, 1000, 10_000])?);
    }
    Ok(out)
}
