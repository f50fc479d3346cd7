use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metasched::harness::{
    compare_schedulers, precompute, probe, read_metrics_csv, run_experiment, stationarity_report,
    write_comparison, write_precomputed, write_stationarity, ConfigError, ExperimentConfig,
    HarnessError,
};

/// Output directory used when neither the flag nor the config names one.
const DEFAULT_OUT: &str = "metasched-out";

#[derive(Parser)]
#[command(
    name = "metasched",
    version,
    about = "Task schedulers for active meta-learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics and summary.
    Run(Common),
    /// Compare schedulers over consecutive seeds starting at the config seed.
    Compare(Common),
    /// Write the reward probes of the initial model.
    Probe(Common),
    /// Write the Gittins and MDP artifacts.
    Precompute(Common),
    /// Report how constant √t·e_t stays per (task, class).
    Stationarity {
        #[command(flatten)]
        common: OptionalConfig,
        /// Existing metrics file; without it the configured run is executed first.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptionalConfig {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load(config: &Path, seed: Option<u64>) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::from_path(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(c) => {
            let cfg = load(&c.config, c.seed)?;
            let dir = out_dir(c.out, Some(&cfg));
            let output = run_experiment(&cfg, Some(&dir))?;
            emit(&format!(
                "{}\n",
                serde_json::to_string_pretty(&output.summary)?
            ));
        }
        Command::Compare(c) => {
            let cfg = load(&c.config, c.seed)?;
            let dir = out_dir(c.out, Some(&cfg));
            let seeds: Vec<u64> = (0..cfg.compare_seeds as u64)
                .map(|k| cfg.seed.wrapping_add(k))
                .collect();
            let table = compare_schedulers(&cfg, &cfg.compare_schedulers, &seeds)?;
            write_comparison(&dir, &table)?;
            emit(&table.to_text());
        }
        Command::Probe(c) => {
            let cfg = load(&c.config, c.seed)?;
            let dir = out_dir(c.out, Some(&cfg));
            let pre = probe(&cfg)?;
            write_precomputed(&dir, &pre)?;
            emit(&format!(
                "{}\n",
                serde_json::to_string_pretty(&pre.reward_table)?
            ));
        }
        Command::Precompute(c) => {
            let cfg = load(&c.config, c.seed)?;
            let dir = out_dir(c.out, Some(&cfg));
            let pre = precompute(&cfg)?;
            write_precomputed(&dir, &pre)?;
            if let Some(reason) = &pre.mdp_skipped {
                log::warn!("MDP artifact skipped: {reason}");
            }
            emit(&format!("wrote artifacts to {}\n", dir.display()));
        }
        Command::Stationarity { common, metrics } => {
            let cfg = common
                .config
                .as_deref()
                .map(|p| load(p, common.seed))
                .transpose()?;
            let dir = out_dir(common.out, cfg.as_ref());
            let records = match (metrics, &cfg) {
                (Some(path), _) => read_metrics_csv(&path)?,
                (None, Some(cfg)) => run_experiment(cfg, Some(&dir))?.metrics,
                (None, None) => {
                    return Err(ConfigError::MissingKey("--metrics or --config".to_string()).into());
                }
            };
            let report = stationarity_report(&records)?;
            write_stationarity(&dir, &report, &records)?;
            emit(&report.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("METASCHED_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
