use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ffspin_cli::config::load;
use ffspin_cli::scenario::{describe, run};

#[derive(Parser)]
#[command(name = "ffspin", version, about = "Fast-forward driving of small XY spin clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Config overrides, `--key value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => {
            let result = load(&config, &overrides).and_then(|c| run(&c).map(|s| (c, s)));
            match result {
                Ok((c, summary)) => {
                    print!("{}", describe(&c, &summary));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { config, overrides } => match load(&config, &overrides) {
            Ok(c) => {
                let violations = c.validate();
                if violations.is_empty() {
                    println!("ok");
                    ExitCode::SUCCESS
                } else {
                    for v in violations {
                        println!("{v}");
                    }
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
