use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srrb::analysis::{BoundFlavor, BoundRequest, Sigma};
use srrb::verify::Suite;
use srrb_cli::{
    check_reports, cmd_analyze, cmd_lower_bound, cmd_run, cmd_sweep, cmd_verify, parse_list, AnalyzeArgs, CliError,
    CliResult, RunOverrides,
};

#[derive(Parser)]
#[command(name = "srrb", version, about = "Thompson sampling on stochastic rising rested bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complexity indices, windowed gaps, Υ and bound terms of an instance file.
    Analyze(AnalyzeCmd),
    /// Simulate every policy of an experiment config.
    Run(RunCmd),
    /// Sweep window exponent or forced exploration for every policy.
    Sweep(SweepCmd),
    /// Run the numerical verification suites.
    Verify(VerifyCmd),
    /// Emit the lower-bound instance pair.
    LowerBound(LowerBoundCmd),
}

#[derive(Args)]
struct AnalyzeCmd {
    /// Instance document.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated windows τ.
    #[arg(long)]
    tau_list: Option<String>,
    /// M in Υ(M, q); defaults to the horizon.
    #[arg(long)]
    upsilon_m: Option<usize>,
    /// σ for the regret bound terms; enables them.
    #[arg(long)]
    bound_sigma: Option<usize>,
    #[arg(long, default_value_t = 0)]
    forced: usize,
    #[arg(long, value_enum, default_value_t = Flavor::Beta)]
    flavor: Flavor,
    #[arg(long, default_value_t = 1.0)]
    precision: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    Beta,
    Gauss,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config document.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct RunCmd {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated exponents α, sweeping τ = T^α.
    #[arg(long)]
    tau_list: Option<String>,
}

#[derive(Args)]
struct VerifyCmd {
    #[arg(long, value_enum, default_value_t = SuiteName::All)]
    suite: SuiteName,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Lemmas,
    Windows,
    Identities,
    All,
}

#[derive(Args)]
struct LowerBoundCmd {
    #[arg(long)]
    arms: usize,
    #[arg(long)]
    sigma_bar: usize,
    #[arg(long)]
    horizon: usize,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        RunOverrides { out: self.out.clone(), seed: self.seed, runs: self.runs, threads: self.threads, stride: self.stride }
    }
}

fn show_sigma(s: Option<Sigma>) -> String {
    s.map_or_else(|| "-".into(), |s| s.to_string())
}

fn analyze(cmd: AnalyzeCmd) -> CliResult<()> {
    let windows = cmd.tau_list.as_deref().map(parse_list).transpose()?.unwrap_or_default();
    let bounds = cmd.bound_sigma.map(|sigma| BoundRequest {
        sigma,
        forced: cmd.forced,
        flavor: match cmd.flavor {
            Flavor::Beta => BoundFlavor::Beta,
            Flavor::Gauss => BoundFlavor::Gauss,
        },
        precision: cmd.precision,
        epsilon: cmd.epsilon,
    });
    let args = AnalyzeArgs { instance: cmd.config, horizon: cmd.horizon, windows, upsilon_m: cmd.upsilon_m, bounds, out: cmd.out };
    let report = cmd_analyze(&args)?;
    if args.out.is_none() {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
        println!("{text}");
    } else {
        println!("T = {}, optimal arm {}, sigma_mu = {}", report.horizon, report.optimal_arm, report.sigma_mu);
        for (i, s) in report.sigma.iter().enumerate() {
            println!("  arm {i}: sigma = {}", show_sigma(*s));
        }
    }
    Ok(())
}

fn run(cmd: RunCmd) -> CliResult<()> {
    let report = cmd_run(&cmd.run.config, &cmd.run.overrides())?;
    for p in &report.policies {
        println!(
            "{}: final regret {:.4} (std {:.4}) over {} runs, wald violations {}",
            p.label,
            p.aggregate.final_mean(),
            p.aggregate.final_std(),
            report.runs,
            p.aggregate.wald_violations
        );
    }
    Ok(())
}

fn sweep(cmd: SweepCmd) -> CliResult<()> {
    let exponents = cmd.tau_list.as_deref().map(parse_list).transpose()?;
    let report = cmd_sweep(&cmd.run.config, &cmd.run.overrides(), exponents)?;
    for p in &report.policies {
        for r in &p.rows {
            println!("{}: {} = {} -> {:.4} (std {:.4})", p.label, axis_name(&report.axis), r.axis_value, r.mean_regret, r.std_regret);
        }
    }
    Ok(())
}

fn axis_name(axis: &srrb::harness::SweepAxis) -> &'static str {
    match axis {
        srrb::harness::SweepAxis::WindowExponent(_) => "alpha",
        srrb::harness::SweepAxis::ForcedExploration(_) => "forced",
    }
}

fn verify(cmd: VerifyCmd) -> CliResult<()> {
    let suite = match cmd.suite {
        SuiteName::Lemmas => Suite::Lemmas,
        SuiteName::Windows => Suite::Windows,
        SuiteName::Identities => Suite::Identities,
        SuiteName::All => Suite::All,
    };
    let reports = cmd_verify(suite, cmd.seed, cmd.out.as_deref())?;
    for r in &reports {
        println!(
            "{} {}: {} checks, {} violations, worst residual {:e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.checks,
            r.violations,
            r.worst_residual
        );
    }
    check_reports(&reports)
}

fn lower_bound(cmd: LowerBoundCmd) -> CliResult<()> {
    let r = cmd_lower_bound(cmd.arms, cmd.sigma_bar, cmd.horizon, &cmd.out)?;
    println!(
        "K = {}, sigma_bar = {}, T = {}: bound {} (gaps {} and {}, sigma_mu {} and {})",
        r.arms, r.sigma_bar, r.horizon, r.bound, r.check.min_gap_mu, r.check.min_gap_mu_prime, r.check.sigma_mu, r.check.sigma_mu_prime
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(c) => analyze(c),
        Command::Run(c) => run(c),
        Command::Sweep(c) => sweep(c),
        Command::Verify(c) => verify(c),
        Command::LowerBound(c) => lower_bound(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
