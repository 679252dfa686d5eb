use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(iconforge::cli::run(std::env::args_os()))
}
