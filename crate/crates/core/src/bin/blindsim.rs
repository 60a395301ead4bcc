use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blindsim::harness::{self, Figure, HarnessError, RunOptions, SEED_ENV};
use blindsim::{Scenario, Strategy};

#[derive(Parser)]
#[command(name = "blindsim", version, about = "Detector blinding and self-test simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and store its results with a manifest.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Reproduce the data behind fig3b, fig4, fig5 or fig6.
    Figure {
        name: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print verdict accuracy and error-rate estimates of a stored run.
    Analyze { dir: PathBuf },
    /// Run one experiment per value of a numeric configuration field.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Dotted field path, or a bare field name if it is unique.
        #[arg(long)]
        path: String,
        /// `a,b,c` or `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Normal,
    Manipulated,
    RecoveryAttack,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Salt,
    FlagPulse,
    SelfBlind,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            config: self.config.clone(),
            scenario: self.scenario.map(|s| match s {
                ScenarioArg::Normal => Scenario::Normal,
                ScenarioArg::Manipulated => Scenario::Manipulated,
                ScenarioArg::RecoveryAttack => Scenario::RecoveryAttack,
                ScenarioArg::Custom => Scenario::Custom,
            }),
            protocol: self.protocol.map(|p| match p {
                ProtocolArg::Salt => Strategy::Salt,
                ProtocolArg::FlagPulse => Strategy::FlagPulse,
                ProtocolArg::SelfBlind => Strategy::SelfBlind,
            }),
            seed: self.seed,
            trials: self.trials,
            threads: self.threads,
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Simulate { run, out } => harness::cmd_simulate(&run.options(), &out, &mut stdout).map(drop),
        Command::Figure { name, out, seed, threads } => {
            let figure: Figure = name.parse()?;
            harness::cmd_figure(figure, &out, seed, threads, &mut stdout).map(drop)
        }
        Command::Analyze { dir } => harness::cmd_analyze(&dir, &mut stdout),
        Command::Sweep { run, path, values, out } => {
            let values = harness::parse_values(&values)?;
            harness::cmd_sweep(&run.options(), &path, &values, out.as_deref(), &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("blindsim: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
