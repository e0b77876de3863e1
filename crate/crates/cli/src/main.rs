use clap::Parser;

use gcm_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("gcm: {e}");
        std::process::exit(e.exit_code());
    }
}
