//! `metnet`: command-line front end for the metnet library.

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;
use metnet::Error;

pub enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    /// See `args::EXIT_CODES`.
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Io(_) | Error::Parse(_) => 3,
                Error::InvalidParameter(_)
                | Error::InvalidNetwork(_)
                | Error::EmptyNetwork
                | Error::IncompatibleOperands(_)
                | Error::InvalidCharacter(_)
                | Error::UnknownStrategy { .. } => 4,
                Error::NumericalFailure(_) | Error::DegenerateMatrix(_) | Error::Inconsistency(_) => 5,
                Error::IncompatibleSource { .. } => 6,
                Error::Stability(_) => 7,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(msg) => msg.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("metnet: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("metnet: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("metnet: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
