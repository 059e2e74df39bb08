use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rkit::cli::run() as u8)
}
