use clap::Parser;
use forecast_dominance::cli::{self, Command};

#[derive(Parser)]
#[command(name = "fdom", version, about = "Forecast dominance diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = serde_json::json!({ "error": "invalid_arguments", "message": e.to_string() });
            eprintln!("{msg}");
            std::process::exit(2);
        }
    };
    match cli::run(&parsed.command) {
        Ok(outcome) => print!("{}", outcome.report),
        Err(err) => {
            eprintln!("{}", cli::error_json(&err));
            std::process::exit(err.exit_code());
        }
    }
}
