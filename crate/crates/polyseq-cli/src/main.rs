use clap::Parser;

fn main() {
    let cli = polyseq_cli::Cli::parse();
    std::process::exit(polyseq_cli::run(cli));
}
