use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ganlab::{run, verify, ConfigFile, Experiment, LabError, Params};

#[derive(Parser)]
#[command(name = "ganlab", version, about = "Seeded toy experiments on GAN and WGAN training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// KL, JS and W between p and a swept family q(t)
    DivergenceSweep(RunArgs),
    /// Gradient play on f(x, y) = xy
    MinimaxSim(RunArgs),
    /// Earth mover's distance between two dirt piles
    EmDemo(RunArgs),
    /// Divergences between parallel segments
    ParallelLines(RunArgs),
    /// Trained discriminator against the optimal one
    OptimalD(RunArgs),
    /// Generator gradient norms while the critic trains
    VanishingGradient(RunArgs),
    /// Mode coverage on a ring of Gaussians
    ModeCollapse(RunArgs),
    /// General GAN or WGAN training run
    Train(RunArgs),
    /// Re-check an existing run directory
    Verify { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config or a previous manifest.json
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Verify the outputs after running
    #[arg(long)]
    verify: bool,
}

fn execute(experiment: Experiment, args: &RunArgs) -> ganlab::Result<()> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let params = Params::resolve(experiment.name(), &experiment.defaults(), &file, args.seed)?;
    let artifact = run(experiment, &params, &args.out)?;
    for p in artifact.outputs.csvs.iter().chain(&artifact.outputs.plots) {
        println!("wrote {}", p.display());
    }
    if args.verify {
        check(&args.out)?;
    }
    Ok(())
}

fn check(dir: &std::path::Path) -> ganlab::Result<()> {
    let report = verify(dir)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(LabError::Verify(format!("{} check(s) failed", report.checks.iter().filter(|c| !c.passed).count())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { dir } => check(dir),
        Command::DivergenceSweep(a) => execute(Experiment::DivergenceSweep, a),
        Command::MinimaxSim(a) => execute(Experiment::MinimaxSim, a),
        Command::EmDemo(a) => execute(Experiment::EmDemo, a),
        Command::ParallelLines(a) => execute(Experiment::ParallelLines, a),
        Command::OptimalD(a) => execute(Experiment::OptimalD, a),
        Command::VanishingGradient(a) => execute(Experiment::VanishingGradient, a),
        Command::ModeCollapse(a) => execute(Experiment::ModeCollapse, a),
        Command::Train(a) => execute(Experiment::Train, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
