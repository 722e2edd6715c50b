use clap::Parser;
use dpw_cli::{run, Cli, UsageError};
use std::process::ExitCode;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DPW_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("DPW_THREADS must be a positive integer (got {v:?})"))?;
    if n == 0 {
        return Err("DPW_THREADS must be a positive integer (got 0)".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
