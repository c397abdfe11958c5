use clap::Parser;

fn main() {
    let args = xpmsim::cli::Args::parse();
    std::process::exit(xpmsim::cli::main_with(args));
}
