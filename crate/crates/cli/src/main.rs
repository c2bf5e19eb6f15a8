mod cli;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use config::{GlobalConfig, Overrides};
use error::{CliError, EXIT_USAGE};

fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let flags = Overrides {
        eps: g.eps,
        mu: g.mu.clone(),
        seed: g.seed,
        out_dir: g.out_dir.clone(),
        verbosity: g.verbose,
        threads: g.threads,
    };
    let cfg = GlobalConfig::load(g.config.as_deref(), &flags)?;
    let level = match cfg.verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match &cli.command {
        Command::Gen(c) => commands::gen(c, &cfg),
        Command::Decompose(a) => commands::decompose(a, &cfg),
        Command::Basis(c) => commands::basis(c, &cfg),
        Command::Classify(a) => commands::classify(a, &cfg),
        Command::Oracle(c) => commands::oracle(c, &cfg),
        Command::Sim(a) => commands::sim(a, &cfg),
        Command::Pipeline(a) => commands::pipeline(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version are not failures
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}
