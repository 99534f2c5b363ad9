//! End-to-end acceptance criteria. Runs without the libtest harness so
//! every criterion prints its `PASS`/`FAIL` line; exits non-zero on any failure.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use srrb::catalog::{late_bloomer, random_rising, rising_comparison_second, stationary_bernoulli};
use srrb::harness::{run_batch, sweep, RunOptions, SweepAxis};
use srrb::verify::{beta_binomial_identity, lemma_chain, lower_bound_grid, rising_comparison_gap, roos_domination, window_accounting};
use srrb::{Instance, PolicyConfig};
use srrb_cli::output::to_json;
use srrb_cli::{cmd_run, ExperimentConfig, InstanceSource, LabeledPolicy, RunOverrides};

const SEED: u64 = 2024;

type Outcome = (u32, bool, String);

fn report(id: u32, ok: bool, detail: String) -> Outcome {
    (id, ok, detail)
}

fn ac1_lemma_chain() -> Outcome {
    let start = Instant::now();
    let r = lemma_chain(10, 200, SEED).unwrap();
    let elapsed = start.elapsed();
    let ok = r.violations == 0 && elapsed < Duration::from_secs(60);
    report(1, ok, format!("{} checks, {} violations, worst excess {:e}, {elapsed:.2?}", r.checks, r.violations, r.worst_residual))
}

fn ac2_beta_binomial_identity() -> Outcome {
    let start = Instant::now();
    let r = beta_binomial_identity(50);
    let elapsed = start.elapsed();
    let ok = r.violations == 0 && r.worst_residual <= 1e-10 && elapsed < Duration::from_secs(5);
    report(2, ok, format!("{} checks, max residual {:e}, {elapsed:.2?}", r.checks, r.worst_residual))
}

fn ac3_roos_domination() -> Outcome {
    let r = roos_domination(500, 12, SEED).unwrap();
    report(3, r.checks == 500 && r.violations == 0, format!("{} cases, {} violations", r.checks, r.violations))
}

fn ac4_lower_bound_constants() -> Outcome {
    let mut checks = 0;
    let mut violations = 0;
    for arms in [2, 3, 15] {
        let r = lower_bound_grid(arms, 50, 1000).unwrap();
        checks += r.checks;
        violations += r.violations;
    }
    report(4, violations == 0, format!("{checks} (K, sigma_bar, T) cases, {violations} violations"))
}

fn ac5_first_comparison_gap() -> Outcome {
    let r = rising_comparison_gap(&[10, 100, 1000, 10_000]).unwrap();
    report(5, r.violations == 0, format!("max T * gap = {} (limit 5/6)", r.worst_residual))
}

fn ac6_window_accounting() -> Outcome {
    let r = window_accounting(100, 5, 2000, &[1, 7, 64, 2000], SEED).unwrap();
    report(6, r.checks > 0 && r.violations == 0, format!("{} round checks, {} mismatches", r.checks, r.violations))
}

fn ac7_wald_per_run() -> Outcome {
    let horizon = 2000;
    let cases: Vec<(Instance, PolicyConfig)> = vec![
        (stationary_bernoulli(&[0.6, 0.5, 0.45, 0.2], horizon).unwrap(), PolicyConfig::beta_ts()),
        (late_bloomer(5000).unwrap(), PolicyConfig::beta_swts(400).with_forced(200)),
        (random_rising(6, horizon, SEED).unwrap(), PolicyConfig::gamma_swgts(300)),
        (rising_comparison_second(0.5, horizon).unwrap(), PolicyConfig::ucb1()),
    ];
    let mut runs = 0;
    let mut violations = 0;
    for (i, (inst, config)) in cases.iter().enumerate() {
        let agg = run_batch(inst, config, 250, SEED + i as u64, 0, &RunOptions::default()).unwrap();
        runs += agg.runs;
        violations += agg.wald_violations;
    }
    report(7, runs == 1000 && violations == 0, format!("{runs} runs over 4 instances, {violations} violations"))
}

fn ac8_stationary_sanity() -> Outcome {
    let start = Instant::now();
    let inst = stationary_bernoulli(&[0.6, 0.5], 10_000).unwrap();
    let agg = run_batch(&inst, &PolicyConfig::beta_ts(), 50, SEED, 0, &RunOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let end = agg.final_mean();
    let half = agg.mean_at(5000).unwrap();
    let ok = end < 80.0 && end - half < 0.5 * half && elapsed < Duration::from_secs(30);
    report(8, ok, format!("R(10^4) = {end:.3}, R(5000) = {half:.3}, growth {:.3}, {elapsed:.2?}", end - half))
}

fn ac9_forced_exploration_sensitivity() -> Outcome {
    let horizon = 20_000;
    let runs = 20;
    let inst = late_bloomer(horizon).unwrap();
    let sigma_mu = inst.sigma_mu().finite().unwrap();
    let base = PolicyConfig::beta_swts(srrb::harness::window_from_exponent(horizon, 0.75));
    let grid = vec![0, 250, 500, 1000, 2000, 4000];
    let rows = sweep(&inst, &base, &SweepAxis::ForcedExploration(grid.clone()), runs, SEED, 0, &RunOptions::default()).unwrap();
    let means: Vec<f64> = rows.iter().map(|r| r.mean_regret).collect();
    let se: Vec<f64> = rows.iter().map(|r| r.std_regret / (runs as f64).sqrt()).collect();
    let knee = (0..means.len()).min_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
    let monotone = (0..knee).all(|k| means[k + 1] <= means[k] + 2.0 * (se[k].powi(2) + se[k + 1].powi(2)).sqrt());
    let improvement = 1.0 - means[knee] / means[0];
    let ok = monotone && improvement >= 0.2 && (1800..=2200).contains(&sigma_mu);
    let table: Vec<String> = grid.iter().zip(&means).map(|(g, m)| format!("{g}:{m:.0}")).collect();
    report(
        9,
        ok,
        format!("sigma_mu = {sigma_mu}, regret by forced rounds [{}], best {} improves {:.0}%", table.join(" "), grid[knee], 100.0 * improvement),
    )
}

fn ac9_fifteen_arm_smoke_run() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let horizon = 20_000;
    let inst = random_rising(15, horizon, SEED).unwrap();
    let window = srrb::harness::window_from_exponent(horizon, 0.75);
    let config = ExperimentConfig {
        instance: InstanceSource::Inline(inst.to_spec()),
        policies: vec![
            LabeledPolicy { label: "et-beta-swts".into(), config: PolicyConfig::beta_swts(window).with_forced(100) },
            LabeledPolicy { label: "gamma-swgts".into(), config: PolicyConfig::gamma_swgts(window) },
            LabeledPolicy { label: "ucb1".into(), config: PolicyConfig::ucb1() },
            LabeledPolicy { label: "sw-ucb".into(), config: PolicyConfig::sw_ucb() },
        ],
        horizon: Some(horizon),
        runs: 20,
        master_seed: SEED,
        stride: None,
        output_dir: None,
        sweep: None,
    };
    let path = dir.path().join("config.json");
    fs::write(&path, to_json(&config)).unwrap();
    let out = dir.path().join("out");
    let start = Instant::now();
    let result = cmd_run(&path, &RunOverrides { out: Some(out.clone()), threads: 8, ..Default::default() }).unwrap();
    let elapsed = start.elapsed();
    let csvs = ["et-beta-swts", "gamma-swgts", "ucb1", "sw-ucb"].iter().filter(|l| out.join(format!("{l}.csv")).is_file()).count();
    let finals: Vec<String> = result.policies.iter().map(|p| format!("{}:{:.0}", p.label, p.aggregate.final_mean())).collect();
    let ok = csvs == 4 && elapsed < Duration::from_secs(300);
    report(9, ok, format!("15-arm smoke run, {csvs} CSVs in {elapsed:.2?}, final regret [{}]", finals.join(" ")))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn ac10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let horizon = 5000;
    let config = ExperimentConfig {
        instance: InstanceSource::Inline(random_rising(5, horizon, 7).unwrap().to_spec()),
        policies: vec![
            LabeledPolicy { label: "beta".into(), config: PolicyConfig::beta_swts(300).with_forced(10) },
            LabeledPolicy { label: "gauss".into(), config: PolicyConfig::gamma_swgts(300) },
            LabeledPolicy { label: "swucb".into(), config: PolicyConfig::sw_ucb() },
        ],
        horizon: None,
        runs: 16,
        master_seed: 99,
        stride: Some(50),
        output_dir: None,
        sweep: None,
    };
    let path = dir.path().join("config.json");
    fs::write(&path, to_json(&config)).unwrap();
    let run = |name: &str, threads: usize| {
        let out = dir.path().join(name);
        cmd_run(&path, &RunOverrides { out: Some(out.clone()), threads, ..Default::default() }).unwrap();
        read_all(&out)
    };
    let first = run("a", 8);
    let again = run("b", 8);
    let serial = run("c", 1);
    let ok = first.len() == 4 && first == again && first == serial;
    report(10, ok, format!("{} files identical across reruns and 1 vs 8 threads", first.len()))
}

fn main() {
    let checks: [fn() -> Outcome; 11] = [
        ac1_lemma_chain,
        ac2_beta_binomial_identity,
        ac3_roos_domination,
        ac4_lower_bound_constants,
        ac5_first_comparison_gap,
        ac6_window_accounting,
        ac7_wald_per_run,
        ac8_stationary_sanity,
        ac9_forced_exploration_sensitivity,
        ac9_fifteen_arm_smoke_run,
        ac10_determinism,
    ];
    let mut failed = 0;
    for check in checks {
        let (id, ok, detail) = check();
        println!("{} AC{id}: {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
