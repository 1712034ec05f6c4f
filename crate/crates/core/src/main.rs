use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = qtel::cli::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(qtel::cli::EXIT_USAGE as u8);
    }
    ExitCode::from(qtel::cli::run(std::env::args_os()) as u8)
}
