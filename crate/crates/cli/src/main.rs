use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use iadmmn_core::solver::CheckLevel;
use iadmmn_harness::check::check_traces;
use iadmmn_harness::gendata::generate_data;
use iadmmn_harness::{run_experiment, summarize, ExperimentConfig, RunOptions};

#[derive(Debug, Parser)]
#[command(
    name = "iadmmn",
    version,
    about = "Inertial ADMM experiments on logistic matrix factorization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Iteration budget for every size, replacing the configured one.
    #[arg(long, global = true)]
    budget_iters: Option<usize>,

    /// Wall-clock budget per run. Without --budget-iters this drops the iteration budgets.
    #[arg(long, global = true)]
    budget_secs: Option<f64>,

    /// Output directory (default: the config's output_dir, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Level::Off)]
    check_level: Level,

    /// Runs executing at once.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every algorithm on every cell and write traces and summary.json.
    Run,
    /// Recompute summary rows and plot data from stored traces.
    Summarize,
    /// Run the Lyapunov diagnostics on stored traces.
    Check {
        /// Relative slack of the descent check.
        #[arg(long, default_value_t = 1e-8)]
        descent_tol: f64,
        /// Lower bound of the objective.
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long, default_value_t = 1e-6)]
        bound_tol: f64,
    },
    /// Write the datasets and starting points of an experiment.
    GenData,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Off,
    Cheap,
    Full,
}

impl From<Level> for CheckLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Off => CheckLevel::Off,
            Level::Cheap => CheckLevel::Cheap,
            Level::Full => CheckLevel::Full,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let Some(path) = &cli.config else {
        bail!("--config is required");
    };
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = cli.budget_iters {
        cfg.budget.iterations = Some(n);
        cfg.sizes.iter_mut().for_each(|s| s.iterations = None);
    }
    if let Some(s) = cli.budget_secs {
        cfg.budget.seconds = Some(s);
        if cli.budget_iters.is_none() {
            cfg.budget.iterations = None;
            cfg.sizes.iter_mut().for_each(|s| s.iterations = None);
        }
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_rows(rows: &[iadmmn_harness::SummaryRow]) {
    println!(
        "{:<20} {:>6} {:>6} {:>14} {:>12} {:>6}",
        "algorithm", "m", "n", "mean", "std", "trials"
    );
    for r in rows {
        println!(
            "{:<20} {:>6} {:>6} {:>14.6e} {:>12.4e} {:>6}",
            r.algorithm, r.m, r.n, r.mean, r.std, r.n_trials
        );
    }
}

fn budget_seconds(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join("summary.json")).ok()?;
    let summary: iadmmn_harness::Summary = serde_json::from_str(&text).ok()?;
    summary.experiment.budget.seconds
}

fn main() -> Result<()> {
    execute(&Cli::parse())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run => {
            let cfg = load_config(cli)?;
            let out = out_dir(cli, Some(&cfg));
            let opts = RunOptions {
                jobs: cli.jobs,
                check_level: cli.check_level.into(),
            };
            let result = run_experiment(&cfg, &out, &opts)?;
            print_rows(&result.summary.rows);
            let failed: Vec<_> = result
                .checks
                .iter()
                .flat_map(|rc| rc.checks.iter().filter(|c| !c.passed).map(move |c| (&rc.run, c)))
                .collect();
            for (run, c) in &failed {
                eprintln!("{run}: {}", c.to_json());
            }
            println!("wrote {}", result.summary_path.display());
            if !failed.is_empty() {
                bail!("{} runtime checks failed", failed.len());
            }
        }
        Command::Summarize => {
            let cfg = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let out = out_dir(cli, cfg.as_ref());
            let secs = cli.budget_secs.or_else(|| budget_seconds(&out));
            let result = summarize(&out, secs)?;
            print_rows(&result.rows);
            for p in &result.plot_files {
                println!("wrote {}", p.display());
            }
        }
        Command::Check {
            descent_tol,
            nu,
            bound_tol,
        } => {
            let cfg = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let out = out_dir(cli, cfg.as_ref());
            let results = check_traces(&out, *descent_tol, *nu, *bound_tol)?;
            let mut failures = 0;
            for r in &results {
                println!("{}", serde_json::to_string(r)?);
                failures += usize::from(!r.ok());
            }
            if failures > 0 {
                bail!("{failures} of {} traces failed", results.len());
            }
        }
        Command::GenData => {
            let cfg = load_config(cli)?;
            let out = out_dir(cli, Some(&cfg));
            let files = generate_data(&cfg, &out)?;
            println!("wrote {} files under {}", files.len(), out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<()> {
        let cli = Cli::try_parse_from(std::iter::once("iadmmn").chain(args.iter().copied()))?;
        execute(&cli)
    }

    fn config(name: &str) -> String {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name)
            .display()
            .to_string()
    }

    #[test]
    fn run_summarize_check_and_gen_data() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let cfg = config("smoke.toml");

        exec(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out,
            "--check-level",
            "cheap",
            "--jobs",
            "2",
        ])
        .unwrap();
        let traces = std::fs::read_dir(dir.path().join("traces")).unwrap().count();
        assert_eq!(traces, 3 * 2 * 2);
        for f in ["summary.json", "inputs.json", "checks.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }

        exec(&["summarize", "--out", out]).unwrap();
        let plot = std::fs::read_to_string(dir.path().join("plot_time_m20_n15.csv")).unwrap();
        assert_eq!(plot.lines().next().unwrap(), "time_s,ADMMn(0.1,0.1),GD,iADMMn(0.1,0.1)");
        assert_eq!(plot.lines().count(), 101);
        let iters = std::fs::read_to_string(dir.path().join("plot_iter_m20_n15.csv")).unwrap();
        assert_eq!(iters.lines().count(), 52);

        exec(&["check", "--out", out]).unwrap();

        exec(&["gen-data", "--config", &cfg, "--out", out, "--seed", "3"]).unwrap();
        assert!(dir.path().join("data/Y__m20_n15__d1.txt").exists());
        assert!(dir.path().join("init/V__m20_n15__d1_i1.txt").exists());
    }

    #[test]
    fn overrides_change_the_budget_and_seed() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        exec(&[
            "run",
            "--config",
            &config("smoke.toml"),
            "--out",
            out,
            "--budget-iters",
            "5",
            "--seed",
            "11",
        ])
        .unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["provenance"]["master_seed"], 11);
        assert_eq!(summary["experiment"]["budget"]["iterations"], 5);
        let trace = std::fs::read_to_string(dir.path().join("traces/GD__m20_n15__d0_i0.csv")).unwrap();
        assert_eq!(trace.lines().count(), 1 + 6);

        let cli = Cli::try_parse_from([
            "iadmmn",
            "run",
            "--config",
            &config("smoke.toml"),
            "--budget-secs",
            "0.5",
        ])
        .unwrap();
        let cfg = load_config(&cli).unwrap();
        assert_eq!(cfg.budget.iterations, None);
        assert_eq!(cfg.budget.seconds, Some(0.5));
    }

    #[test]
    fn bad_inputs_fail_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.toml");
        let text = std::fs::read_to_string(config("smoke.toml")).unwrap();
        std::fs::write(&bad, text.replace("rank = 4", "rank = 4\nrnak = 5")).unwrap();
        let out = dir.path().join("o");
        let err = exec(&["run", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).unwrap_err();
        assert!(format!("{err:#}").contains("rnak"));

        // tau2 >= 2 tau1 is rejected before any run starts
        std::fs::write(
            &bad,
            text.replace("tau2 = 0.1\n\n[[variants]]", "tau2 = 0.3\n\n[[variants]]"),
        )
        .unwrap();
        assert!(exec(&["run", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).is_err());
        assert!(!out.join("traces").exists());

        assert!(exec(&["run"]).is_err());
        assert!(exec(&["run", "--check-level", "loud"]).is_err());
    }
}
