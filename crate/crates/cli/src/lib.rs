//! Library side of the `srrb` command-line tool. Each `cmd_*` function
//! computes everything in memory first and only then writes its output
//! set, so a failing command leaves no partial files behind.

pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use srrb::analysis::{AnalysisRequest, BoundRequest};
use srrb::catalog::{lower_bound_check_exact, lower_bound_instances, LowerBoundCheck, BOOSTED_ARM};
use srrb::harness::{run_batch, sweep, Aggregate, RunOptions, SweepAxis, SweepRow};
use srrb::verify::{run_suite, Suite, SuiteReport};
use srrb::{analyze, AnalysisReport, InstanceSpec, PolicyConfig};

pub use config::{ExperimentConfig, InstanceSource, LabeledPolicy, ResolvedConfig};
pub use error::{CliError, CliResult};
use output::{content_hash, csv_real, csv_table, to_json, OutputSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `q` values reported for `Υ(M, q)`.
pub const UPSILON_Q: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

pub const RUN_JSON: &str = "run.json";
pub const SWEEP_JSON: &str = "sweep.json";
pub const ANALYSIS_JSON: &str = "analysis.json";
pub const VERIFY_JSON: &str = "verify.json";
pub const LOWER_BOUND_JSON: &str = "lower_bound.json";
pub const MU_JSON: &str = "mu.json";
pub const MU_PRIME_JSON: &str = "mu_prime.json";

pub const RUN_CSV_HEADER: [&str; 3] = ["grid_t", "mean_regret", "std_regret"];
pub const SWEEP_CSV_HEADER: [&str; 3] = ["axis_value", "mean_regret", "std_regret"];

pub fn run_csv_name(label: &str) -> String {
    format!("{label}.csv")
}

pub fn sweep_csv_name(label: &str) -> String {
    format!("{label}_sweep.csv")
}

/// Parses a comma-separated list such as `1,64,2000`.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Config(format!("cannot parse {s:?} in list {text:?}"))))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeArgs {
    pub instance: PathBuf,
    /// Re-evaluate the instance on this horizon instead of its own.
    pub horizon: Option<usize>,
    /// Windows for `σ′`/`Δ′`; the horizon alone when empty.
    pub windows: Vec<usize>,
    pub upsilon_m: Option<usize>,
    pub bounds: Option<BoundRequest>,
    pub out: Option<PathBuf>,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<AnalysisReport> {
    let mut instance = config::load_instance(&args.instance)?;
    if let Some(h) = args.horizon {
        if h == 0 {
            return Err(CliError::Config("horizon must be positive".into()));
        }
        instance = instance.with_horizon(h)?;
    }
    let windows = if args.windows.is_empty() { vec![instance.horizon()] } else { args.windows.clone() };
    let request = AnalysisRequest {
        windows,
        gap_points: Vec::new(),
        upsilon_q: UPSILON_Q.to_vec(),
        upsilon_m: args.upsilon_m,
        bounds: args.bounds,
    };
    let report = analyze(&instance, &request)?;
    if let Some(out) = &args.out {
        let mut set = OutputSet::new();
        set.add(ANALYSIS_JSON, to_json(&report));
        set.commit(out)?;
    }
    Ok(report)
}

/// Command-line overrides of an experiment config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub threads: usize,
    pub stride: Option<usize>,
}

fn apply_overrides(config: &Path, o: &RunOverrides) -> CliResult<(ResolvedConfig, PathBuf)> {
    let mut resolved = ExperimentConfig::load(config)?;
    let c = &mut resolved.config;
    if let Some(seed) = o.seed {
        c.master_seed = seed;
    }
    if let Some(runs) = o.runs {
        if runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        c.runs = runs;
    }
    if let Some(stride) = o.stride {
        if stride == 0 {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        c.stride = Some(stride);
    }
    let out = match (&o.out, &c.output_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => resolved.base_dir.join(dir),
        (None, None) => return Err(CliError::Config("no output directory: pass --out or set output_dir".into())),
    };
    Ok((resolved, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRun {
    pub label: String,
    pub config: PolicyConfig,
    pub aggregate: Aggregate,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub instance_hash: String,
    pub instance: InstanceSpec,
    pub horizon: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub stride: usize,
    pub policies: Vec<PolicyRun>,
}

/// Runs every policy of the config with the same master seed, so all
/// policies face the same reward streams.
pub fn cmd_run(config: &Path, overrides: &RunOverrides) -> CliResult<RunReport> {
    let (resolved, out) = apply_overrides(config, overrides)?;
    let c = &resolved.config;
    let instance = &resolved.instance;
    let stride = c.stride.unwrap_or_else(|| srrb::harness::default_stride(instance.horizon()));
    let options = RunOptions { stride: Some(stride), keep_pulls: false };
    let mut set = OutputSet::new();
    let mut policies = Vec::new();
    for p in &c.policies {
        let aggregate = run_batch(instance, &p.config, c.runs, c.master_seed, overrides.threads, &options)?;
        let rows = (0..aggregate.grid.len())
            .map(|k| vec![aggregate.grid[k].to_string(), csv_real(aggregate.mean[k]), csv_real(aggregate.std[k])]);
        set.add(run_csv_name(&p.label), csv_table(&RUN_CSV_HEADER, rows));
        policies.push(PolicyRun { label: p.label.clone(), config: p.config, aggregate });
    }
    let spec = instance.to_spec();
    let report = RunReport {
        version: VERSION.into(),
        instance_hash: content_hash(&spec),
        instance: spec,
        horizon: instance.horizon(),
        runs: c.runs,
        master_seed: c.master_seed,
        stride,
        policies,
    };
    set.add(RUN_JSON, to_json(&report));
    set.commit(&out)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySweep {
    pub label: String,
    pub base: PolicyConfig,
    pub rows: Vec<SweepRow>,
}

/// Contents of `sweep.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub instance_hash: String,
    pub instance: InstanceSpec,
    pub horizon: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub stride: usize,
    pub axis: SweepAxis,
    pub policies: Vec<PolicySweep>,
}

/// Sweeps each policy over the config's axis; `window_exponents`
/// replaces the axis with `τ = T^α` for the listed `α`.
pub fn cmd_sweep(config: &Path, overrides: &RunOverrides, window_exponents: Option<Vec<f64>>) -> CliResult<SweepReport> {
    let (resolved, out) = apply_overrides(config, overrides)?;
    let c = &resolved.config;
    let instance = &resolved.instance;
    let axis = match (window_exponents, &c.sweep) {
        (Some(v), _) => SweepAxis::WindowExponent(v),
        (None, Some(axis)) => axis.clone(),
        (None, None) => return Err(CliError::Config("sweep needs a \"sweep\" axis in the config or --tau-list".into())),
    };
    if axis.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    if let SweepAxis::WindowExponent(v) = &axis {
        if let Some(a) = v.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(CliError::Config(format!("window exponent {a} outside [0, 1]")));
        }
    }
    let stride = c.stride.unwrap_or_else(|| srrb::harness::default_stride(instance.horizon()));
    let options = RunOptions { stride: Some(stride), keep_pulls: false };
    let mut set = OutputSet::new();
    let mut policies = Vec::new();
    for p in &c.policies {
        for idx in 0..axis.len() {
            let (_, point) = axis.point(&p.config, instance.horizon(), idx);
            point
                .validate(instance.horizon())
                .map_err(|e| CliError::Config(format!("policy {:?} at sweep point {idx}: {e}", p.label)))?;
        }
        let rows = sweep(instance, &p.config, &axis, c.runs, c.master_seed, overrides.threads, &options)?;
        let lines = rows
            .iter()
            .map(|r| vec![csv_real(r.axis_value), csv_real(r.mean_regret), csv_real(r.std_regret)]);
        set.add(sweep_csv_name(&p.label), csv_table(&SWEEP_CSV_HEADER, lines));
        policies.push(PolicySweep { label: p.label.clone(), base: p.config, rows });
    }
    let spec = instance.to_spec();
    let report = SweepReport {
        version: VERSION.into(),
        instance_hash: content_hash(&spec),
        instance: spec,
        horizon: instance.horizon(),
        runs: c.runs,
        master_seed: c.master_seed,
        stride,
        axis,
        policies,
    };
    set.add(SWEEP_JSON, to_json(&report));
    set.commit(&out)?;
    Ok(report)
}

/// Runs a verification suite. The reports are returned (and written when
/// `out` is given) even when a check fails; the error carries the summary.
pub fn cmd_verify(suite: Suite, seed: u64, out: Option<&Path>) -> CliResult<Vec<SuiteReport>> {
    let reports = run_suite(suite, seed)?;
    if let Some(out) = out {
        let mut set = OutputSet::new();
        set.add(VERIFY_JSON, to_json(&reports));
        set.commit(out)?;
    }
    Ok(reports)
}

/// Turns failed suites into a [`CliError::Violation`].
pub fn check_reports(reports: &[SuiteReport]) -> CliResult<()> {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} ({} of {} checks, e.g. {})", r.name, r.violations, r.checks, r.example.as_deref().unwrap_or("-")))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(failed.join("; ")))
    }
}

/// Contents of `lower_bound.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub version: String,
    pub arms: usize,
    pub sigma_bar: usize,
    pub horizon: usize,
    /// `K (σ̄ − 2) / 64`.
    pub bound: f64,
    pub boosted_arm: usize,
    pub mu_file: String,
    pub mu_prime_file: String,
    pub mu_hash: String,
    pub mu_prime_hash: String,
    /// Exact gaps as `[numerator, denominator]` and `σ_μ` of both instances.
    pub check: LowerBoundCheck,
    pub min_gap_mu: f64,
    pub min_gap_mu_prime: f64,
    pub gaps_hold: bool,
}

pub fn cmd_lower_bound(arms: usize, sigma_bar: usize, horizon: usize, out: &Path) -> CliResult<LowerBoundReport> {
    let range = |e: srrb::Error| match e {
        srrb::Error::OutOfRange(m) => CliError::Config(m),
        other => other.into(),
    };
    let pair = lower_bound_instances(arms, sigma_bar, horizon).map_err(range)?;
    let check = lower_bound_check_exact(arms, sigma_bar, horizon).map_err(range)?;
    let (mu, mu_prime) = (pair.mu.to_spec(), pair.mu_prime.to_spec());
    let report = LowerBoundReport {
        version: VERSION.into(),
        arms,
        sigma_bar,
        horizon,
        bound: pair.bound,
        boosted_arm: BOOSTED_ARM,
        mu_file: MU_JSON.into(),
        mu_prime_file: MU_PRIME_JSON.into(),
        mu_hash: content_hash(&mu),
        mu_prime_hash: content_hash(&mu_prime),
        check,
        min_gap_mu: *check.min_gap_mu.numer() as f64 / *check.min_gap_mu.denom() as f64,
        min_gap_mu_prime: *check.min_gap_mu_prime.numer() as f64 / *check.min_gap_mu_prime.denom() as f64,
        gaps_hold: check.gaps_hold(),
    };
    let mut set = OutputSet::new();
    set.add(MU_JSON, to_json(&mu));
    set.add(MU_PRIME_JSON, to_json(&mu_prime));
    set.add(LOWER_BOUND_JSON, to_json(&report));
    set.commit(out)?;
    if !report.gaps_hold {
        return Err(CliError::Violation(format!("gap constants fail: {check:?}")));
    }
    Ok(report)
}
