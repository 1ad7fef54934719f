use std::process::ExitCode;

use clap::Parser;
use geofusion_cli::{expand_config, run, Cli};

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("geofusion: {}", one_line(&format!("{e:#}")));
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let text = e.render().to_string();
            eprintln!("geofusion: {}", one_line(text.lines().next().unwrap_or("usage error")));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geofusion: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
