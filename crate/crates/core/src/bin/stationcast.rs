use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;

use stationcast::config::RunConfig;
use stationcast::pipeline;
use stationcast::{Error, Result};

/// Graph-convolutional bike-share demand forecasting.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Run configuration in `key = value` form.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for grid search and per-station models.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    jobs: usize,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Floor predictions at zero before computing metrics.
    #[arg(long, global = true)]
    clip_negative: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse trip CSVs into an hourly demand container.
    Ingest,
    /// Build the pairwise matrix, adjacency and filter for a fixed-graph model.
    BuildGraph,
    /// Train the configured model at a single hyperparameter point.
    Train,
    /// Search the configured hyperparameter grid.
    Grid,
    /// Score every saved model on the test split.
    Evaluate,
    /// Analyse a learned graph filter as a weighted graph.
    Analyze,
    /// Write container sections out as CSV and text files.
    Export {
        /// Containers to export; defaults to every `.scst` in the output directory.
        artifacts: Vec<PathBuf>,
    },
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("STATIONCAST_LOG") {
        Err(_) => LevelFilter::Warn,
        Ok(v) => match v.trim().to_ascii_lowercase().as_str() {
            "error" => LevelFilter::Error,
            "warn" => LevelFilter::Warn,
            "info" => LevelFilter::Info,
            "debug" => LevelFilter::Debug,
            _ => {
                return Err(Error::Usage(format!(
                    "STATIONCAST_LOG must be one of error, warn, info, debug; got `{v}`"
                )))
            }
        },
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.clip_negative |= cli.clip_negative;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    init_logging()?;
    if cli.jobs == 0 {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    let cfg = load_config(&cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    match &cli.command {
        Command::Ingest => print!("{}", pipeline::cmd_ingest(&cfg)?.to_csv()),
        Command::BuildGraph => println!("{}", pipeline::cmd_build_graph(&cfg)?.display()),
        Command::Train => {
            let t = pipeline::cmd_train(&cfg)?;
            println!("validation RMSE {}", t.fit.val_rmse);
        }
        Command::Grid => print!("{}", pipeline::cmd_grid(&cfg, cli.jobs)?),
        Command::Evaluate => print!("{}", pipeline::cmd_evaluate(&cfg)?),
        Command::Analyze => {
            for p in pipeline::cmd_analyze(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Export { artifacts } => {
            for p in pipeline::cmd_export(&cfg, artifacts)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
