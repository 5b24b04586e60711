use clap::Parser;

fn main() -> std::process::ExitCode {
    blockflow::cli::execute(blockflow::cli::Cli::parse())
}
