//! Reproducible experiment runner for hypocauchy.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use output::RunManifest;
pub use runner::{run, RunOutput};

/// One command-line invocation.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub kind: ExperimentKind,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Result of [`invoke`]; the manifest has already been written.
#[derive(Debug)]
pub struct Completed {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub output: Option<RunOutput>,
}

fn default_out(kind: ExperimentKind) -> PathBuf {
    Path::new("out").join(kind.name())
}

/// Loads, validates and runs a configuration, writing all artifacts.
///
/// Diagnostics go to standard error. Exit codes: 0 success, 2 invalid
/// configuration, 3 numerical non-convergence (results still written).
pub fn invoke(inv: &Invocation) -> Completed {
    let start = Instant::now();
    let mut manifest = RunManifest::new();
    manifest.experiment = Some(inv.kind.name().into());
    manifest.config_path = Some(inv.config.display().to_string());
    let text = std::fs::read_to_string(&inv.config);
    let parsed = match &text {
        Ok(t) => ExperimentConfig::from_toml(t),
        Err(e) => Err(CliError::Config(format!("{}: {e}", inv.config.display()))),
    };
    let mut out_dir = inv.out.clone().unwrap_or_else(|| default_out(inv.kind));
    let mut output = None;
    let result: Result<RunOutput, CliError> = match parsed {
        Err(e) => {
            manifest.config_text = text.ok();
            Err(e)
        }
        Ok(mut cfg) => {
            if let Some(s) = inv.seed {
                cfg.seed = s;
            }
            if inv.out.is_none() {
                if let Some(o) = &cfg.output {
                    out_dir = o.clone();
                }
            }
            manifest.seed = Some(cfg.seed);
            manifest.config = serde_json::to_value(&cfg).ok();
            if cfg.experiment != inv.kind {
                Err(CliError::Config(format!(
                    "config is for `{}`, not `{}`",
                    cfg.experiment.name(),
                    inv.kind.name()
                )))
            } else {
                runner::run(&cfg)
            }
        }
    };
    let exit_code = match std::fs::create_dir_all(&out_dir) {
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", out_dir.display());
            return Completed { exit_code: 1, out_dir, manifest, output };
        }
        Ok(()) => match result {
            Ok(out) => {
                manifest.convergence = out.convergence.clone();
                let code = match output::write_outputs(&out_dir, &out) {
                    Ok(files) => {
                        manifest.files = files;
                        if out.converged() {
                            0
                        } else {
                            eprintln!("warning: numerical non-convergence: {:?}", failed(&out));
                            manifest.error = Some(format!("not converged: {}", failed(&out).join(", ")));
                            3
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        manifest.error = Some(e.to_string());
                        e.exit_code()
                    }
                };
                output = Some(out);
                code
            }
            Err(e) => {
                eprintln!("error: {e}");
                manifest.error = Some(e.to_string());
                e.exit_code()
            }
        },
    };
    manifest.exit_code = exit_code;
    manifest.status = match exit_code {
        0 => "ok",
        2 => "invalid_config",
        3 => "not_converged",
        _ => "error",
    }
    .into();
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.files.push(output::MANIFEST.into());
    if let Err(e) = manifest.write(&out_dir) {
        eprintln!("error: cannot write manifest: {e}");
    }
    Completed { exit_code, out_dir, manifest, output }
}

fn failed(out: &RunOutput) -> Vec<String> {
    out.convergence.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.clone()).collect()
}
