use std::process::ExitCode;

fn main() -> ExitCode {
    substat::cli::run_from(std::env::args_os())
}
