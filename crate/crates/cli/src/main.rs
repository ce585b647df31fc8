use std::process::ExitCode;

fn main() -> ExitCode {
    qsdc_cli::app::main_with(std::env::args_os())
}
