//! `reckit` command line: prepare data, run baselines and LLM clients,
//! evaluate, compare and tabulate.

mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reckit_core::config::{ConfigError, Overrides, RunConfig};
use reckit_core::dataset::DatasetError;
use reckit_core::experiments::{store::StoreError, ExperimentError};
use reckit_core::llm::LlmError;
use reckit_core::metrics::MetricsError;
use reckit_core::recommenders::RecommenderError;
use reckit_core::report::ReportError;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags (exit 1).
    Config(String),
    /// Dataset or artifact problems (exit 2).
    Data(String),
    /// Endpoint/transport failures (exit 3).
    Endpoint(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Endpoint(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Endpoint(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<RecommenderError> for CliError {
    fn from(e: RecommenderError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Endpoint { .. }
            | LlmError::Transport(_)
            | LlmError::MalformedResponse(_)
            | LlmError::MissingApiKey(_) => CliError::Endpoint(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Dataset(inner) => inner.into(),
            ExperimentError::Recommender(inner) => inner.into(),
            ExperimentError::Llm(inner) => inner.into(),
            ExperimentError::Metrics(inner) => inner.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "reckit",
    about = "Evaluate chat LLMs as zero-shot recommenders against classical baselines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Override split.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override llm.client (http, stub:echo-mostpop, stub:reverse-candidates,
    /// stub:gibberish).
    #[arg(long)]
    client: Option<String>,
    /// Override preprocessing.history_cap.
    #[arg(long)]
    history_cap: Option<usize>,
    /// Override evaluation.cutoffs, comma separated.
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<usize>>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            output_dir: self.out.clone(),
            client: self.client.clone(),
            history_cap: self.history_cap,
            cutoffs: self.cutoffs.clone(),
        };
        Ok(RunConfig::load(&self.config, &overrides)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load, preprocess and split the dataset; write split and stats files.
    Prepare(CommonArgs),
    /// Fit the configured baselines and persist their ranked lists.
    RunBaselines(CommonArgs),
    /// Query the configured chat client (or stub) and persist its lists.
    RunLlm(CommonArgs),
    /// Score every persisted run with the full metric battery.
    Evaluate(CommonArgs),
    /// Jaccard/Kendall similarity between persisted runs.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Run to compare from (model id).
        #[arg(long)]
        base: String,
        /// Single run to compare against; all others when omitted.
        #[arg(long)]
        against: Option<String>,
    },
    /// Emit comparison tables from the evaluation reports.
    Report(CommonArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare(args) => {
            let config = args.load()?;
            let info = pipeline::prepare(&config)?;
            println!(
                "prepared {}: {} interactions ({} train / {} test), {} users, {} items",
                info.dataset,
                info.interactions,
                info.train_interactions,
                info.test_interactions,
                info.users,
                info.items
            );
        }
        Command::RunBaselines(args) => {
            let config = args.load()?;
            let runs = pipeline::run_baselines(&config)?;
            println!("wrote {runs} baseline run(s)");
        }
        Command::RunLlm(args) => {
            let config = args.load()?;
            let runs = pipeline::run_llm(&config)?;
            println!("wrote {runs} run(s) from the LLM pipeline");
        }
        Command::Evaluate(args) => {
            let config = args.load()?;
            let reports = pipeline::evaluate(&config)?;
            println!("evaluated {} run(s)", reports.len());
        }
        Command::Compare { common, base, against } => {
            let config = common.load()?;
            let path = pipeline::compare(&config, &base, against.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Report(args) => {
            let config = args.load()?;
            for path in pipeline::report(&config)? {
                println!("wrote {}", path.display());
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
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
