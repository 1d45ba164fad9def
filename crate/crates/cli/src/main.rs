use std::process::ExitCode;

fn main() -> ExitCode {
    hwdims_cli::main_with(std::env::args_os())
}
