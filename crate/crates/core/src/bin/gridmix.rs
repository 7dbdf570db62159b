use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use gridmix::cli::{cmd_balance, cmd_optimize, cmd_prepare, cmd_report, parse_fraction_list, RunOptions};
use gridmix::datamodel::DEFAULT_AGGREGATION_THRESHOLD;

#[derive(Parser)]
#[command(name = "gridmix", version, about = "Rooftop PV, storage and generation-mix planning")]
struct Cli {
    /// Maximum number of concurrent sweep evaluations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArg {
    /// Data directory (raw inputs or a prepared bundle).
    #[arg(long, env = "GRIDMIX_DATA")]
    data: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a data directory and write a normalized bundle.
    Prepare {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        out: PathBuf,
        /// Villages below this population are merged per province.
        #[arg(long, default_value_t = DEFAULT_AGGREGATION_THRESHOLD)]
        threshold: u64,
    },
    /// Simulate one year of dispatch for a scenario.
    Balance {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep PV/storage pairs and hydro manageability.
    Optimize {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated hydro manageability fractions, e.g. 0.4,0.55,0.7,0.85.
        #[arg(long)]
        hydro_fractions: Option<String>,
    },
    /// Verify a run directory and print its headline numbers.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Prepare { data, out, threshold } => {
            let m = cmd_prepare(&data.data, &out, threshold).context("prepare failed")?;
            println!("bundle written to {} ({} files)", out.display(), m.outputs.len());
        }
        Command::Balance { data, scenario, out } => {
            let opts = RunOptions {
                data_dir: data.data,
                scenario,
                out_dir: out,
            };
            cmd_balance(&opts).context("balance failed")?;
            print!("{}", cmd_report(&opts.out_dir)?);
        }
        Command::Optimize {
            data,
            scenario,
            out,
            hydro_fractions,
        } => {
            let fractions = hydro_fractions
                .map(|s| parse_fraction_list(&s))
                .transpose()
                .context("invalid --hydro-fractions")?;
            let opts = RunOptions {
                data_dir: data.data,
                scenario,
                out_dir: out,
            };
            cmd_optimize(&opts, fractions.as_deref()).context("optimize failed")?;
            print!("{}", cmd_report(&opts.out_dir)?);
        }
        Command::Report { out } => print!("{}", cmd_report(&out).context("report failed")?),
    }
    Ok(())
}
