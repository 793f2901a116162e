use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use povmround_cli::{run, write, Args, EXIT_PARSE, TOL_ENV};

fn main() -> ExitCode {
    env_logger::init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE as u8 } else { 0 });
        }
    };
    let env = std::env::var(TOL_ENV).ok();
    let code = match run(&args, env.as_deref()) {
        Ok(outcome) => {
            let written = match &args.out {
                Some(path) => write(path, &outcome.output),
                None => std::io::stdout().write_all(outcome.output.as_bytes()).map_err(|e| povmround_cli::CliError::Io(e.to_string())),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            for name in &outcome.failed {
                eprintln!("violation: check `{name}` failed");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
