use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(reward_route::cli::main_with_args(std::env::args_os()))
}
