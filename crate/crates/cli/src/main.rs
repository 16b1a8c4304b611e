mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};

fn error_kind(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<stall_core::Error>())
        .map_or("internal", stall_core::Error::kind)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        anyhow::bail!(stall_core::Error::InvalidArgument("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    eprintln!("stall: seed {} jobs {jobs}", cli.seed);
    match &cli.command {
        Command::Synth(a) => commands::synth(a, cli.seed),
        Command::Calibrate(a) => commands::calibrate(a, cli.seed),
        Command::Score(a) => commands::score(a, jobs),
        Command::Eval(a) => commands::eval(a, cli.seed),
        Command::Stats(a) => commands::stats(a, cli.seed),
        Command::Perturb(a) => commands::perturb(a, cli.seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STALL_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({"error": "usage", "message": e.to_string().trim_end()}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", json!({"error": error_kind(&err), "message": format!("{err:#}")}));
            ExitCode::FAILURE
        }
    }
}
