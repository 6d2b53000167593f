use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use issm_forecast::config::RunConfig;
use issm_forecast::pipeline::{run_evaluate, run_forecast};
use issm_forecast::Result;

#[derive(Parser)]
#[command(name = "issm-forecast", version, about = "Probabilistic retail sales forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every node of the hierarchy and write quantile forecasts.
    Forecast(Common),
    /// Score a forecast file against held-out sales.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct Common {
    /// Wide sales history CSV.
    #[arg(long)]
    sales: Option<String>,
    /// Calendar CSV covering history and horizon.
    #[arg(long)]
    calendar: Option<String>,
    /// Weekly price CSV used for revenue weights.
    #[arg(long)]
    prices: Option<String>,
    /// `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// Monte Carlo trajectories per node.
    #[arg(long)]
    trajectories: Option<String>,
    /// Comma-separated quantile levels.
    #[arg(long)]
    levels: Option<String>,
    /// Hierarchy levels to forecast, e.g. `1-9,12` or `all`.
    #[arg(long)]
    hierarchy_levels: Option<String>,
    /// Output CSV.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    /// Submission id suffix: `validation` or `evaluation`.
    #[arg(long)]
    phase: Option<String>,
    /// Directory for per-node `date,level,value` fan chart CSVs.
    #[arg(long)]
    emit_fanchart: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Submission CSV to score.
    #[arg(long)]
    forecasts: Option<String>,
    /// Wide CSV of held-out sales.
    #[arg(long)]
    actuals: Option<String>,
}

fn build_config(common: &Common, extra: &[(&str, &Option<String>)]) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &common.config {
        config.apply_file(path)?;
    }
    let flags = [
        ("sales", &common.sales),
        ("calendar", &common.calendar),
        ("prices", &common.prices),
        ("seed", &common.seed),
        ("horizon", &common.horizon),
        ("trajectories", &common.trajectories),
        ("levels", &common.levels),
        ("hierarchy_levels", &common.hierarchy_levels),
        ("out", &common.out),
        ("jobs", &common.jobs),
        ("phase", &common.phase),
        ("fanchart", &common.emit_fanchart),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forecast(common) => {
            let config = build_config(&common, &[])?;
            let forecasts = run_forecast(&config)?;
            eprintln!("wrote {} nodes", forecasts.len());
        }
        Command::Evaluate(args) => {
            let config = build_config(
                &args.common,
                &[("forecasts", &args.forecasts), ("actuals", &args.actuals)],
            )?;
            let report = run_evaluate(&config)?;
            for (level, s) in &report.levels {
                eprintln!(
                    "level {level:>2}: model {:.4}  naive {:.4}  snaive {:.4}",
                    s.model, s.naive, s.snaive
                );
            }
            eprintln!(
                "overall:  model {:.4}  naive {:.4}  snaive {:.4}",
                report.overall.model, report.overall.naive, report.overall.snaive
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
