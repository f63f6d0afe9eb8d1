use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match flexglove_cli::run(std::env::args_os().skip(1)) {
        Ok(stdout) => {
            print!("{stdout}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(failure) if failure.code == flexglove_cli::EXIT_OK => {
            // --help and --version
            print!("{}", failure.message);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let msg = failure.message.trim_end();
            if msg.starts_with("error:") {
                eprintln!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(failure.code as u8)
        }
    }
}
