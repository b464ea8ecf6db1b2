use clap::Parser;
use nodal_cy::cli::{run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    std::process::exit(run(&cfg));
}
