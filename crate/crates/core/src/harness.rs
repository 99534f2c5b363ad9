//! Seeded Monte-Carlo runner: single trajectories, parallel batches with
//! run-order aggregation, and one-axis sensitivity sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::{Agent, Policy, PolicyConfig};
use crate::regret::{wald_upper_estimate, RegretAccumulator};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless child seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master.wrapping_add(GOLDEN)) ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// `max(1, T / 10⁴)`.
pub fn default_stride(horizon: usize) -> usize {
    (horizon / 10_000).max(1)
}

/// Rounds at which `R̂` is recorded: `0, s, 2s, …`, plus `T` if missing.
pub fn regret_grid(horizon: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut grid: Vec<usize> = (0..=horizon).step_by(stride).collect();
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// `None` selects [`default_stride`].
    pub stride: Option<usize>,
    /// Keep the full pull sequence in the record.
    pub keep_pulls: bool,
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub grid: Vec<usize>,
    /// `R̂(t)` at each grid point.
    pub regret: Vec<f64>,
    pub pull_counts: Vec<usize>,
    pub wald_estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulls: Option<Vec<usize>>,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    /// Per-trajectory `R̂(T) ≤ Σ_{i≠i*} Δ_i(T,1) N_{i,T}`, with a relative
    /// slack for summation-order rounding.
    pub fn wald_holds(&self) -> bool {
        self.final_regret() <= self.wald_estimate + 1e-9 * self.wald_estimate.abs().max(1.0)
    }
}

/// Largest `λ²` across the arms' reward laws.
pub fn instance_subgaussian(instance: &Instance) -> f64 {
    instance.arms().iter().map(|a| a.law.subgaussian()).fold(0.0, f64::max)
}

pub fn check_compatible(instance: &Instance, config: &PolicyConfig) -> Result<()> {
    config.validate(instance.horizon())?;
    if config.needs_binary_rewards() {
        if let Some(i) = instance.arms().iter().position(|a| !a.law.is_binary()) {
            return Err(Error::Policy(format!(
                "{:?} needs binary rewards but arm {i} has law {:?}",
                config.kind,
                instance.arms()[i].law
            )));
        }
    }
    Ok(())
}

/// Drives `agent` for `T` rounds. The reward of a pull is drawn at the
/// arm's lifetime pull count from a stream seeded with `reward_seed`.
pub fn run_agent<A: Agent>(
    instance: &Instance,
    agent: &mut A,
    reward_seed: u64,
    options: &RunOptions,
) -> Result<RunRecord> {
    let horizon = instance.horizon();
    let grid = regret_grid(horizon, options.stride.unwrap_or_else(|| default_stride(horizon)));
    let mut rng = ChaCha8Rng::seed_from_u64(reward_seed);
    let mut acc = RegretAccumulator::new(instance);
    let mut regret = Vec::with_capacity(grid.len());
    regret.push(0.0);
    let mut next = 1;
    let mut pulls = options.keep_pulls.then(|| Vec::with_capacity(horizon));
    for t in 1..=horizon {
        let arm = agent.select_arm(t)?;
        acc.record(arm)?;
        let n = acc.counts()[arm];
        let reward = instance.arms()[arm].law.sample(instance.mu_unchecked(arm, n), &mut rng);
        agent.update(arm, reward, t)?;
        if let Some(p) = pulls.as_mut() {
            p.push(arm);
        }
        if next < grid.len() && grid[next] == t {
            regret.push(acc.regret());
            next += 1;
        }
    }
    let pull_counts = acc.counts().to_vec();
    let wald_estimate = wald_upper_estimate(instance, &pull_counts)?;
    Ok(RunRecord { run: 0, seed: reward_seed, grid, regret, pull_counts, wald_estimate, pulls })
}

/// One trajectory of `config` on `instance` over its horizon.
pub fn run_single(instance: &Instance, config: &PolicyConfig, seed: u64, options: &RunOptions) -> Result<RunRecord> {
    check_compatible(instance, config)?;
    let mut policy = Policy::new(
        *config,
        instance.num_arms(),
        instance.horizon(),
        instance_subgaussian(instance),
        derive_seed(seed, 0),
    )?;
    let mut record = run_agent(instance, &mut policy, derive_seed(seed, 1), options)?;
    record.seed = seed;
    Ok(record)
}

/// Cross-run statistics. `std` uses the population denominator `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub master_seed: u64,
    pub grid: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub mean_pull_counts: Vec<f64>,
    pub final_regrets: Vec<f64>,
    pub wald_violations: usize,
}

impl Aggregate {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.std.last().copied().unwrap_or(0.0)
    }

    /// Mean `R̂(t)` at grid point `t`.
    pub fn mean_at(&self, t: usize) -> Option<f64> {
        self.grid.iter().position(|&g| g == t).map(|i| self.mean[i])
    }

    /// Two-pass mean/std over records taken in the given order.
    pub fn from_records(records: &[RunRecord], master_seed: u64) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::OutOfRange("need at least one run".into()))?;
        let r = records.len() as f64;
        let points = first.grid.len();
        let mut mean = vec![0.0; points];
        for rec in records {
            for (m, v) in mean.iter_mut().zip(&rec.regret) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= r);
        let mut std = vec![0.0; points];
        for rec in records {
            for ((s, v), m) in std.iter_mut().zip(&rec.regret).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        std.iter_mut().for_each(|s| *s = (*s / r).sqrt());
        let arms = first.pull_counts.len();
        let mut mean_pull_counts = vec![0.0; arms];
        for rec in records {
            for (m, &c) in mean_pull_counts.iter_mut().zip(&rec.pull_counts) {
                *m += c as f64;
            }
        }
        mean_pull_counts.iter_mut().for_each(|m| *m /= r);
        Ok(Aggregate {
            runs: records.len(),
            master_seed,
            grid: first.grid.clone(),
            mean,
            std,
            mean_pull_counts,
            final_regrets: records.iter().map(RunRecord::final_regret).collect(),
            wald_violations: records.iter().filter(|r| !r.wald_holds()).count(),
        })
    }
}

/// Runs `runs` trajectories on a pool of `threads` workers (0 = rayon's
/// default). Run `r` uses seed `derive_seed(master_seed, r)`; records come
/// back in run order, so the output does not depend on scheduling.
pub fn run_batch_records(
    instance: &Instance,
    config: &PolicyConfig,
    runs: usize,
    master_seed: u64,
    threads: usize,
    options: &RunOptions,
) -> Result<Vec<RunRecord>> {
    if runs == 0 {
        return Err(Error::OutOfRange("runs must be at least 1".into()));
    }
    check_compatible(instance, config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|r| {
                let mut rec = run_single(instance, config, derive_seed(master_seed, r as u64), options)?;
                rec.run = r;
                Ok(rec)
            })
            .collect()
    })
}

pub fn run_batch(
    instance: &Instance,
    config: &PolicyConfig,
    runs: usize,
    master_seed: u64,
    threads: usize,
    options: &RunOptions,
) -> Result<Aggregate> {
    let records = run_batch_records(instance, config, runs, master_seed, threads, options)?;
    Aggregate::from_records(&records, master_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepAxis {
    /// `τ = round(T^α)` clamped to `[1, T]`.
    WindowExponent(Vec<f64>),
    ForcedExploration(Vec<usize>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::WindowExponent(v) => v.len(),
            SweepAxis::ForcedExploration(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis value and the configuration at grid index `idx`.
    pub fn point(&self, base: &PolicyConfig, horizon: usize, idx: usize) -> (f64, PolicyConfig) {
        match self {
            SweepAxis::WindowExponent(v) => (v[idx], base.with_window(window_from_exponent(horizon, v[idx]))),
            SweepAxis::ForcedExploration(v) => (v[idx] as f64, base.with_forced(v[idx])),
        }
    }
}

pub fn window_from_exponent(horizon: usize, alpha: f64) -> usize {
    ((horizon as f64).powf(alpha).round() as usize).clamp(1, horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub config: PolicyConfig,
    pub master_seed: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
}

/// Master seed of sweep point `idx`.
pub fn sweep_point_seed(master_seed: u64, idx: usize) -> u64 {
    derive_seed(master_seed ^ 0x5357_4545_5000_0000, idx as u64)
}

/// One [`run_batch`] per axis value.
pub fn sweep(
    instance: &Instance,
    base: &PolicyConfig,
    axis: &SweepAxis,
    runs: usize,
    master_seed: u64,
    threads: usize,
    options: &RunOptions,
) -> Result<Vec<SweepRow>> {
    if axis.is_empty() {
        return Err(Error::OutOfRange("sweep grid is empty".into()));
    }
    (0..axis.len())
        .map(|idx| {
            let (axis_value, config) = axis.point(base, instance.horizon(), idx);
            let seed = sweep_point_seed(master_seed, idx);
            let agg = run_batch(instance, &config, runs, seed, threads, options)?;
            Ok(SweepRow {
                axis_value,
                config,
                master_seed: seed,
                mean_regret: agg.final_mean(),
                std_regret: agg.final_std(),
            })
        })
        .collect()
}
