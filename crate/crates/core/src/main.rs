//! `delone-lab`: generate point sets and run the finite-window analyses.

mod cli;

fn main() {
    std::process::exit(cli::main());
}
