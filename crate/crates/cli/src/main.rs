use std::process::ExitCode;

fn main() -> ExitCode {
    let workers = std::env::var(bubqkd_cli::WORKERS_ENV).ok();
    let code = bubqkd_cli::run(std::env::args_os(), workers.as_deref(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
