use clap::Parser;
use covcd_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("covcd: {e}");
        std::process::exit(e.exit_code());
    }
}
