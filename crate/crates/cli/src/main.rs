use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use wifisynth_cli::{run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let outcome = run(&cli, &mut out);
    let _ = out.flush();
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
