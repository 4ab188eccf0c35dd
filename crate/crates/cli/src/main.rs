use clap::Parser;

fn main() {
    let cli = qcbound::args::Cli::parse();
    std::process::exit(qcbound::execute(&cli));
}
