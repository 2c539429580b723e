use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fitness_levels::experiment::{
    cmd_bounds, cmd_experiment, cmd_simulate, load_config, Overrides,
};
use fitness_levels::verify::{run_criterion, Fault, VerifyOptions, CRITERIA};

const EXIT_VALIDATION: u8 = 1;
const EXIT_ACCEPTANCE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fitlevel",
    version,
    about = "Fitness-level bounds and EA simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML with `[[experiment]]` tables).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of Monte-Carlo runs.
    #[arg(long, global = true)]
    runs: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Reduced run counts with correspondingly wider intervals.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write bound trajectories, one CSV per series.
    Bounds,
    /// Write per-run records for every grid point.
    Simulate,
    /// Run the grid, merge with the bounds, write CSV and SVG.
    Experiment,
    /// Run the acceptance checks.
    Verify {
        /// Criteria to run (default: all).
        criteria: Vec<u8>,
        /// Corrupt an input on purpose to exercise the failure path.
        #[arg(long, value_parser = ["gamma"])]
        inject_fault: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            ref criteria,
            ref inject_fault,
        } => verify(&cli, criteria, inject_fault.is_some()),
        _ => match batch(&cli) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_VALIDATION)
            }
        },
    }
}

fn batch(cli: &Cli) -> fitness_levels::Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| fitness_levels::Error::Config("--config is required".into()))?;
    let overrides = Overrides {
        seed: cli.seed,
        runs: cli.runs,
    };
    for spec in load_config(path, &overrides)? {
        match cli.command {
            Command::Bounds => {
                for p in cmd_bounds(&spec, &cli.out)? {
                    println!("{}", p.display());
                }
            }
            Command::Simulate => {
                for p in cmd_simulate(&spec, &cli.out)? {
                    println!("{}", p.display());
                }
            }
            Command::Experiment => {
                let (csv, svg) = cmd_experiment(&spec, &cli.out)?;
                println!("{}\n{}", csv.display(), svg.display());
            }
            Command::Verify { .. } => unreachable!("handled in main"),
        }
    }
    Ok(())
}

fn verify(cli: &Cli, criteria: &[u8], fault: bool) -> ExitCode {
    if let Some(bad) = criteria.iter().find(|id| !CRITERIA.contains(id)) {
        eprintln!("error: no criterion {bad}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let mut opts = VerifyOptions {
        quick: cli.quick,
        fault: fault.then_some(Fault::CorruptGamma),
        ..Default::default()
    };
    if let Some(seed) = cli.seed {
        opts.seed = seed;
    }
    if opts.quick {
        println!(
            "quick mode: intervals widen by up to {:.2}x",
            opts.tolerance_scale(10_000)
        );
    }
    let ids = if criteria.is_empty() {
        CRITERIA.to_vec()
    } else {
        criteria.to_vec()
    };
    let mut all_passed = true;
    for id in ids {
        let report = run_criterion(id, &opts);
        all_passed &= report.passed();
        print!("{report}");
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ACCEPTANCE)
    }
}
