use clap::Parser;

fn main() {
    let cli = zipfit::cli::Cli::parse();
    if let Err(e) = zipfit::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
