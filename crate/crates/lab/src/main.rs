use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cocycle_lab::{run, validate_file, ExperimentKind, RunRequest};

/// Lyapunov-spectrum experiments on matrix cocycles.
#[derive(Parser)]
#[command(name = "cocycle-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact (finite base) or QR-estimated (sampled base) spectrum.
    Spectrum(Common),
    /// The sequence (1/n)∫log‖∧^k Aⁿ‖ and its running infimum.
    Lambda(Common),
    /// Distances τ_p and ρ_p between `cocycle` and `other`.
    Rho(Common),
    /// Semicontinuity radius for (k, epsilon).
    Certificate(Common),
    /// Samples the certified ball and compares Λ_k exactly.
    Sweep(Common),
    /// Collapse witnesses within each radius.
    Collapse(Common),
    /// Continuity profile over the radius ladder.
    Profile(Common),
    /// Replays the inequalities behind the certificate on sampled perturbations.
    ProofCheck(Common),
    /// Prints config diagnostics for a verb without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Verb to validate against.
        #[arg(long = "as", default_value = "spectrum")]
        verb: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, common) = match cli.command {
        Command::Spectrum(c) => (ExperimentKind::Spectrum, c),
        Command::Lambda(c) => (ExperimentKind::LambdaSeq, c),
        Command::Rho(c) => (ExperimentKind::Rho, c),
        Command::Certificate(c) => (ExperimentKind::Certificate, c),
        Command::Sweep(c) => (ExperimentKind::Sweep, c),
        Command::Collapse(c) => (ExperimentKind::Collapse, c),
        Command::Profile(c) => (ExperimentKind::Profile, c),
        Command::ProofCheck(c) => (ExperimentKind::ProofCheck, c),
        Command::Validate { config, verb } => {
            let Some(kind) = ExperimentKind::ALL.into_iter().find(|k| k.verb() == verb) else {
                eprintln!("unknown verb `{verb}`");
                return ExitCode::from(2);
            };
            return match validate_file(kind, &config) {
                Ok(d) if d.is_empty() => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Ok(d) => {
                    d.iter().for_each(|d| println!("{d}"));
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let req = RunRequest { verb, config_path: common.config, out: common.out, seed: common.seed, trials: common.trials };
    match run(&req) {
        Ok(report) => {
            println!("{}", report.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
