use std::process::ExitCode;

use t3_cli::{parse_config, run, CliError, EXIT_ERROR, OUTPUT_DIR_ENV};

fn main() -> ExitCode {
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(Into::into);
    let result = parse_config(std::env::args_os(), env_dir).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            for d in &outcome.diagnostics {
                eprintln!("{}", serde_json::to_string(d).unwrap_or_default());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(CliError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
