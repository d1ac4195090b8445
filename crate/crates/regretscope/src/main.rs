use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use regretscope::cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("REGRETSCOPE_LOG", "warn")).init();
    let cli = Cli::parse();
    match regretscope::run(&cli) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
