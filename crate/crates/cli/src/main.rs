use clap::Parser;

fn main() {
    let cli = photoscint_cli::Cli::parse();
    if let Err(e) = photoscint_cli::run(cli) {
        eprintln!("photoscint: {e}");
        std::process::exit(e.exit_code());
    }
}
