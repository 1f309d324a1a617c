//! `beamsim` — Monte-Carlo simulator for data-selective LCMV beamformers.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamsim::config::load_spec;
use beamsim::harness::{flop_report, run_monte_carlo, write_outputs, AlgoId, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "beamsim",
    about = "Monte-Carlo simulator for data-selective LCMV adaptive beamformers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (exp1, exp2) or a custom scenario file
    Run(RunArgs),
    /// List the available algorithm identifiers
    Algos,
    /// Validate a scenario file without running anything
    Validate {
        /// Scenario file to check
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (exp1 or exp2); omit when using --config
    preset: Option<String>,

    /// Custom scenario file (key=value format)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Number of Monte-Carlo trials [default: the scenario's runs value]
    #[arg(long)]
    runs: Option<usize>,

    /// Base seed; trial t uses seed + t
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Comma-separated algorithms to run
    #[arg(long, value_delimiter = ',', default_value = "smcg,frost_sg,rls,sm_sg,mvdr_oracle")]
    algos: Vec<String>,

    /// Output directory for CSV and JSON files
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Override the number of sensors
    #[arg(long)]
    m: Option<usize>,

    /// Override the desired-source SNR in dB
    #[arg(long)]
    snr_db: Option<f64>,

    /// Override the per-interferer INR in dB
    #[arg(long)]
    inr_db: Option<f64>,

    /// Override the bound tuning coefficient alpha
    #[arg(long)]
    alpha: Option<f64>,

    /// Override the bound forgetting factor beta
    #[arg(long)]
    beta: Option<f64>,

    /// Override the CG step-control parameter eta
    #[arg(long)]
    eta: Option<f64>,

    /// Override the number of snapshots per trial
    #[arg(long)]
    snapshots: Option<usize>,
}

fn run(args: RunArgs) -> beamsim::Result<()> {
    let mut spec = match (&args.preset, &args.config) {
        (Some(p), None) => ExperimentSpec::preset(p)?,
        (None, Some(path)) => load_spec(path)?,
        (None, None) => {
            return Err(beamsim::Error::Config(
                "specify a preset (exp1, exp2) or --config <file>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap forbids preset together with --config"),
    };

    let mut overrides = Vec::new();
    macro_rules! apply {
        ($field:ident, $flag:expr) => {
            if let Some(v) = args.$field {
                spec.$field = v;
                overrides.push(format!("{}={}", $flag, v));
            }
        };
    }
    apply!(m, "--m");
    apply!(snr_db, "--snr-db");
    apply!(inr_db, "--inr-db");
    apply!(alpha, "--alpha");
    apply!(beta, "--beta");
    apply!(eta, "--eta");
    if let Some(v) = args.snapshots {
        spec.n_snapshots = v;
        overrides.push(format!("--snapshots={v}"));
    }

    let algos: Vec<AlgoId> =
        args.algos.iter().map(|s| AlgoId::parse(s)).collect::<beamsim::Result<_>>()?;
    let runs = args.runs.unwrap_or(spec.runs_default);

    // Full validation happens before any output file is touched.
    spec.validate()?;

    let mut res = run_monte_carlo(&spec, &algos, runs, args.seed)?;
    res.overrides = overrides;
    let written = write_outputs(&res, &args.out)?;

    println!(
        "{}: {} runs x {} snapshots, base seed {}",
        spec.name, runs, spec.n_snapshots, args.seed
    );
    print!("{}", flop_report(&res));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Algos => {
            for a in AlgoId::ALL {
                println!("{}", a.as_str());
            }
            Ok(())
        }
        Command::Validate { config } => load_spec(&config).map(|spec| {
            println!("{}: ok ({} sensors, {} snapshots)", spec.name, spec.m, spec.n_snapshots);
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
