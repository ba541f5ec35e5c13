use std::process::ExitCode;

fn main() -> ExitCode {
    match focusview::cli::main_with(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("focusview: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
