use clap::Parser;

fn main() {
    let cli = cocycle_cli::Cli::parse();
    std::process::exit(cocycle_cli::run(cli));
}
