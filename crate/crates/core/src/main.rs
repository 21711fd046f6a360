use clap::Parser;

use oscwalk::cli;

fn main() {
    let args = cli::Cli::parse();
    std::process::exit(cli::run(&args));
}
