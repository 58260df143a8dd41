use std::process::ExitCode;

fn main() -> ExitCode {
    fbm_adiabatic::cli::run(std::env::args_os())
}
