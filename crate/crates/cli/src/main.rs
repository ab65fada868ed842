use clap::Parser;
use hypangle::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = hypangle::run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(hypangle::exit_code(&e));
    }
}
