use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stylodisp::report::{run, Overrides, RunConfig, Stage};

/// Topic-versus-style embedding dispersion pipeline.
#[derive(Parser)]
#[command(name = "stylodisp", version, about)]
struct Cli {
    /// Run configuration (TOML). Relative paths inside it resolve against
    /// its own directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Forbid all network access; provider fetches fail on cache misses.
    #[arg(long, global = true)]
    offline: bool,

    /// Override the global seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Load and validate the corpus manifest; snapshot it for later stages.
    Ingest,
    /// Synthesize the generated cells via the configured chat provider.
    Generate,
    /// Fetch or import embeddings for every configured model.
    Embed,
    /// PCA sweep + k-means + Purity/NMI scores per model and dimension.
    ValidateClusters,
    /// Multi-seed UMAP dispersion and the five directional hypotheses.
    Dispersion,
    /// Extract the eight stylometric feature groups and the ground table.
    Stylometry,
    /// Correlate dispersion deltas with feature deltas (masked matrix).
    Correlate,
    /// Render a human-readable summary from existing artifacts.
    Report,
    /// Run every stage in order.
    RunAll {
        /// Run only the named stage (ingest, generate, embed,
        /// validate-clusters, dispersion, stylometry, correlate, report).
        #[arg(long)]
        stage: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    let config_path = cli.config.ok_or("--config is required")?;
    let overrides = Overrides { offline: cli.offline, seed: cli.seed, out_dir: cli.out };
    let config = RunConfig::load(&config_path, &overrides).map_err(|e| e.to_string())?;

    let stage = match &cli.command {
        Commands::Ingest => Some(Stage::Ingest),
        Commands::Generate => Some(Stage::Generate),
        Commands::Embed => Some(Stage::Embed),
        Commands::ValidateClusters => Some(Stage::ValidateClusters),
        Commands::Dispersion => Some(Stage::Dispersion),
        Commands::Stylometry => Some(Stage::Stylometry),
        Commands::Correlate => Some(Stage::Correlate),
        Commands::Report => Some(Stage::Report),
        Commands::RunAll { stage } => match stage {
            Some(name) => {
                Some(Stage::from_name(name).ok_or_else(|| format!("unknown stage {name:?}"))?)
            }
            None => None,
        },
    };
    run(&config, stage).map_err(|e| e.to_string())
}
