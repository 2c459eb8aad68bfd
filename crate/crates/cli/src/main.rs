use std::io::Write;

use clap::Parser;
use pcc_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary is valid JSON");
            // a closed pipe is not an error; the output files are already written
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
        Err(e) => {
            eprintln!("pcc: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
