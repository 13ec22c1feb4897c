use clap::Parser;

fn main() {
    let cli = octagon_cli::Cli::parse();
    std::process::exit(octagon_cli::execute(&cli));
}
