use clap::Parser;
use spectral_shift::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
