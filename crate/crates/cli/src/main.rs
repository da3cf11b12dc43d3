use std::io::Write;

use clap::Parser;
use wdmd_cli::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(summary) => {
            // A closed stdout (e.g. piped into `head`) is not a failure.
            let _ = writeln!(std::io::stdout(), "{summary}");
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(1);
        }
    }
}
