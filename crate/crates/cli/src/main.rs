use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

mod commands;
mod error;
mod figure;
mod render;

use error::{CliError, CliResult};
use render::Format;

/// Time- and efficiency-aware scaling-law calculator.
#[derive(Debug, Parser)]
#[command(name = "scaling-horizon", version)]
struct Cli {
    #[command(flatten)]
    out: OutputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Significant digits for text and CSV output.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u8).range(3..=17))]
    pub precision: u8,
    /// Write to a file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    pub fn g(&self, x: f64) -> String {
        render::fmt_g(x, self.precision as usize)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate R(t) and L(t) at given times or over an even grid.
    Eval(EvalArgs),
    /// Solve for the time at which R(t) reaches a target.
    Solve(SolveArgs),
    /// Run built-in or file-defined fleet scenarios.
    Scenario(ScenarioArgs),
    /// Emit the data series behind figure 1, 2 or 3.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
    },
    /// Print the GPU-hour accounting table.
    Account(AccountArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
#[command(group(ArgGroup::new("times").required(true).args(["t", "t_max"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Loss at t = 0; also enables the loss line in single-point output.
    #[arg(long)]
    pub l0: Option<f64>,
    /// Evaluation times in years, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub t: Vec<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 101, requires = "t_max")]
    pub samples: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Target relative loss in (0, 1].
    #[arg(long)]
    pub target: f64,
    /// Relative change of the baseline compute, > -1.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Also print dt/dτ and its 1/(γ ln 2) approximation.
    #[arg(long)]
    pub sensitivity: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["file", "preset", "compare"])))]
pub struct ScenarioArgs {
    /// Scenario JSON file (one object or an array).
    pub file: Option<PathBuf>,
    /// Preset name or slug, or `all`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario JSON file to run against a common target, sorted by time.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Target loss; defaults to 0.68 with --compare.
    #[arg(long)]
    pub target: Option<f64>,
    /// Use the published L0 and required ratio where available.
    #[arg(long)]
    pub paper_values: bool,
    #[arg(long, env = "SCALING_HORIZON_PRESET_DIR", hide_env_values = true)]
    pub preset_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AccountArgs {
    /// Model-account JSON file (one object or an array); last row is the baseline.
    #[arg(conflicts_with = "builtin")]
    pub file: Option<PathBuf>,
    /// Built-in comparison.
    #[arg(long, value_parser = ["deepseek-llama"])]
    pub builtin: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// Do not send permissive CORS headers.
    #[arg(long)]
    pub no_cors_allow: bool,
}

fn run(cli: Cli) -> CliResult<()> {
    let out = &cli.out;
    let text = match &cli.command {
        Command::Eval(a) => commands::eval(a, out)?,
        Command::Solve(a) => commands::solve(a, out)?,
        Command::Scenario(a) => commands::scenario(a, out)?,
        Command::Figure { id } => figure::render(*id, out)?,
        Command::Account(a) => commands::account(a, out)?,
        Command::Serve(a) => return serve(a),
    };
    render::emit(&text, out.output.as_deref()).map_err(|e| match &out.output {
        Some(path) => CliError::io(path, &e),
        None => CliError::Input(e.to_string()),
    })
}

fn serve(args: &ServeArgs) -> CliResult<()> {
    let options = scaling_horizon_service::ServiceOptions {
        cors_allow_any: !args.no_cors_allow,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(e.to_string()))?;
    runtime
        .block_on(scaling_horizon_service::serve(
            SocketAddr::new(args.bind, args.port),
            options,
        ))
        .map_err(|e| CliError::Input(format!("serve: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
