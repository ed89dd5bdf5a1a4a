use std::process::ExitCode;

mod config;
mod runner;

fn main() -> ExitCode {
    match runner::run_cli() {
        Ok(violations) => {
            if violations == 0 {
                ExitCode::SUCCESS
            } else {
                eprintln!("{violations} invariant violation(s); see the failing-sample report");
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
