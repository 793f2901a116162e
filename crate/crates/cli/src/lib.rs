//! Library side of the `povmround` binary, split out so the integration
//! tests can drive commands without spawning a process.

pub mod commands;
pub mod error;
pub mod format;
pub mod generate;

use std::path::{Path, PathBuf};

use clap::Parser;
use povmround::Tolerances;

pub use commands::Command;
pub use error::{CliError, EXIT_OK, EXIT_PARSE, EXIT_VIOLATION};

/// Environment variable holding `key=val,...` tolerance overrides. Flags win.
pub const TOL_ENV: &str = "POVMROUND_TOL_OVERRIDES";

#[derive(Debug, Parser)]
#[command(name = "povmround", version, about = "Round approximate POVMs to projective measurements")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Instance file (or generator spec for `gen`, sweep config for `sweep`).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
    /// Per-instance CSV (sweep only).
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

/// Outcome of one invocation: what to write and which checks failed.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub failed: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }
}

/// Env overrides first, then `--tol` flags, then `--seed`.
pub fn resolve_tolerances(env: Option<&str>, flags: &[String], seed: Option<u64>) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    let bad = |loc: &str, e: povmround::Error| CliError::Parse { location: loc.into(), message: e.to_string() };
    if let Some(list) = env {
        tol.apply_overrides(list).map_err(|e| bad(TOL_ENV, e))?;
    }
    for f in flags {
        tol.apply_overrides(f).map_err(|e| bad("--tol", e))?;
    }
    if let Some(s) = seed {
        tol.seed = s;
    }
    tol.validate().map_err(|e| bad("tolerances", e))?;
    Ok(tol)
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

pub fn run(args: &Args, env_overrides: Option<&str>) -> Result<Outcome, CliError> {
    let tol = resolve_tolerances(env_overrides, &args.tol, args.seed)?;
    let input = read(&args.input)?;
    if args.csv.is_some() && args.command != Command::Sweep {
        return Err(CliError::Parse { location: "--csv".into(), message: "only `sweep` writes a CSV".into() });
    }
    match args.command {
        Command::Gen => {
            let text = std::str::from_utf8(&input)
                .map_err(|e| CliError::Parse { location: "input".into(), message: e.to_string() })?;
            let spec = generate::GenSpec::parse(text)?;
            let file = generate::generate(&spec, args.seed.unwrap_or(0), &tol)?;
            Ok(Outcome { output: file.to_json(), failed: Vec::new() })
        }
        Command::Sweep => {
            let (rep, rows) = commands::run_sweep(&input, args.seed.unwrap_or(0), &tol)?;
            if let Some(path) = &args.csv {
                write(path, &commands::sweep_csv(&rows)?)?;
            }
            let failed = rep.failed_checks().map(|c| c.name.clone()).collect();
            Ok(Outcome { output: to_json(&rep), failed })
        }
        cmd => {
            let rep = commands::run_instance_command(cmd, &input, &tol)?;
            let failed = rep.failed_checks().map(|c| c.name.clone()).collect();
            Ok(Outcome { output: to_json(&rep), failed })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_environment() {
        let flags = vec!["cert_tol=1e-6".to_string()];
        let tol = resolve_tolerances(Some("cert_tol=1e-3,psd_tol=1e-7"), &flags, Some(9)).unwrap();
        assert_eq!(tol.cert_tol, 1e-6);
        assert_eq!(tol.psd_tol, 1e-7);
        assert_eq!(tol.seed, 9);
        match resolve_tolerances(Some("bogus=1"), &[], None) {
            Err(CliError::Parse { location, .. }) => assert_eq!(location, TOL_ENV),
            other => panic!("{other:?}"),
        }
    }
}
