use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match solimg_cli::parse_args(std::env::args()) {
        Ok(cli) => cli,
        Err(err) => {
            // clap help/version requests are not failures.
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                if matches!(
                    clap_err.kind(),
                    clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
                ) {
                    print!("{clap_err}");
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!(
                "{}",
                serde_json::json!({ "error": err.to_string().lines().next().unwrap_or("parse error") })
            );
            return ExitCode::FAILURE;
        }
    };
    match solimg_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::json!({
                    "command": cli.command.name(),
                    "error": err.to_string(),
                })
            );
            ExitCode::FAILURE
        }
    }
}
