use clap::error::ErrorKind;
use clap::Parser;

use lc_arena::cli::{error_line, run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": "usage", "message": first }));
            std::process::exit(2);
        }
    };
    match run(cli) {
        Ok(msg) => println!("{msg}"),
        Err(e) => {
            eprintln!("{}", error_line(&e));
            std::process::exit(1);
        }
    }
}
