use std::process::ExitCode;

fn main() -> ExitCode {
    pnc::cli::main_with_args(std::env::args_os())
}
