use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hypocauchy_cli::{invoke, ExperimentKind, Invocation};

/// Experiments with generalized Cauchy operators of hypocomplex vector fields.
#[derive(Parser, Debug)]
#[command(name = "hypocauchy", version)]
struct Args {
    /// Experiment to run; must match `experiment` in the config.
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel steps.
    #[arg(long)]
    threads: Option<usize>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let done = invoke(&Invocation { kind: args.kind, config: args.config, out: args.out, seed: args.seed });
    if let Some(out) = &done.output {
        print!("{}", out.text);
    }
    eprintln!("artifacts in {}", done.out_dir.display());
    ExitCode::from(done.exit_code as u8)
}
