use std::path::PathBuf;
use std::process::ExitCode;

use autor_core::harness::{run, Algorithm, ExperimentConfig, RunInputs, Verb};
use clap::{CommandFactory, FromArgMatches, Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Module {
    Amc,
    Ldpc,
    Dirm,
    Iubr,
    E2e,
}

impl From<Module> for Algorithm {
    fn from(m: Module) -> Self {
        match m {
            Module::Amc => Algorithm::Amc,
            Module::Ldpc => Algorithm::Ldpc,
            Module::Dirm => Algorithm::Dirm,
            Module::Iubr => Algorithm::Iubr,
            Module::E2e => Algorithm::E2e,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerbArg {
    GenData,
    Train,
    Eval,
    Decode,
    BruteForce,
    Run,
}

impl From<VerbArg> for Verb {
    fn from(v: VerbArg) -> Self {
        match v {
            VerbArg::GenData => Verb::GenData,
            VerbArg::Train => Verb::Train,
            VerbArg::Eval => Verb::Eval,
            VerbArg::Decode => Verb::Decode,
            VerbArg::BruteForce => Verb::BruteForce,
            VerbArg::Run => Verb::Run,
        }
    }
}

/// Train and evaluate the receiver and radio-management models.
#[derive(Debug, Parser)]
#[command(name = "autor")]
struct Cli {
    module: Module,
    verb: VerbArg,
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides AUTOR_SEED and the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
    /// Dataset CSV to use instead of generating one.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Checkpoint file, or the checkpoint directory for `dirm eval`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// LLR CSV for `ldpc decode`.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn main() -> ExitCode {
    let matches = Cli::command()
        .version(autor_core::harness::version_string())
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("autor: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> autor_core::Result<()> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    config.resolve_seed(cli.seed)?;
    let inputs = RunInputs {
        data: cli.data,
        checkpoint: cli.checkpoint,
        input: cli.input,
    };
    let record = run(
        config,
        cli.module.into(),
        cli.verb.into(),
        &cli.out,
        &inputs,
    )?;
    println!(
        "{} {} seed {} -> {} ({:.1} s)",
        record.algorithm,
        record.verb,
        record.seed,
        cli.out.display(),
        record.wall_time_s
    );
    Ok(())
}
