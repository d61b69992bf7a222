use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twistctl::{cmd_barrier, cmd_check, cmd_destroy, cmd_minimal, cmd_orbit, cmd_plot, CliError, Options, RunReport, Scenario};

#[derive(Parser, Debug)]
#[command(name = "twistctl", version, about = "Twist maps, Peierls barriers and invariant-circle destruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML)
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory, overriding the scenario's `output`
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Barrier grid size
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Window half-width for placing I and starting the signed barrier
    /// (default: the window at which the free heteroclinic settles)
    #[arg(long, global = true)]
    window: Option<usize>,

    /// Print nothing but errors
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Condition batteries for the base norm or generating function
    Check,
    /// Build the perturbation and certify the destruction
    Destroy,
    /// Iterate the base map from `[orbit]`
    Orbit,
    /// Periodic barrier of the base on a uniform grid
    Barrier,
    /// Minimal periodic configuration of the base
    Minimal,
    /// SVG charts from the CSVs in the output directory
    Plot,
}

fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let opts = Options { out: cli.out.clone(), grid: cli.grid, window: cli.window, quiet: cli.quiet };
    let scenario = cli.scenario.as_deref().map(Scenario::load).transpose()?;
    let need = || scenario.as_ref().ok_or_else(|| CliError::Config("--scenario is required".into()));
    match cli.command {
        Command::Check => cmd_check(need()?, &opts),
        Command::Destroy => cmd_destroy(need()?, &opts),
        Command::Orbit => cmd_orbit(need()?, &opts),
        Command::Barrier => cmd_barrier(need()?, &opts),
        Command::Minimal => cmd_minimal(need()?, &opts),
        Command::Plot => {
            if scenario.is_none() && opts.out.is_none() {
                return Err(CliError::Config("plot needs --scenario or --out".into()));
            }
            cmd_plot(scenario.as_ref(), &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.to_text());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
