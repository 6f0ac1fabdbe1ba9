use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coprod::Error;

mod commands;
mod report;

use commands::Settings;

#[derive(Parser, Debug)]
#[command(name = "coprod", version, about = "Coproducts of monads on finite sets")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Samples per sampled check.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Largest probe set for law checks.
    #[arg(long, global = true, default_value_t = 2)]
    probes: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a coproduct and check laws, embeddings and closed forms.
    Coprod(commands::SumArgs),
    /// Check the monad laws.
    Laws(commands::MonadArgs),
    /// List the unit complement with least supports.
    Complement(commands::ComplementArgs),
    /// Show the stages of the initial chain.
    Chain(commands::ChainArgs),
    /// Closure of a functor at the empty set.
    Closure(commands::ClosureArgs),
    /// Consistency and closure class of a monad.
    Classify(commands::MonadArgs),
    /// Decide existence from fixpoint profiles.
    Advise(commands::AdviseArgs),
    /// Enumerate canonical layered terms.
    Terms(commands::TermsArgs),
    /// Free monads on signatures.
    Free(commands::FreeArgs),
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::UnknownMonad(_) | Error::BadSpecifier(_) => 2,
        Error::NoConvergence(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = Settings {
        seed: cli.seed,
        samples: cli.samples,
        probes: cli.probes,
    };
    let result = match &cli.command {
        Command::Coprod(a) => commands::coprod(a, cfg),
        Command::Laws(a) => commands::laws(a, cfg),
        Command::Complement(a) => commands::complement(a, cfg),
        Command::Chain(a) => commands::chain(a, cfg),
        Command::Closure(a) => commands::closure(a, cfg),
        Command::Classify(a) => commands::classify_cmd(a, cfg),
        Command::Advise(a) => commands::advise(a, cfg),
        Command::Terms(a) => commands::terms(a, cfg),
        Command::Free(a) => commands::free(a, cfg),
    };
    match result {
        Ok(report) => {
            let out = match cli.format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json() + "\n",
            };
            // a closed pipe is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::from(report.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NoConvergence(trace) = &e {
                eprint!("{trace}");
            }
            ExitCode::from(exit_for(&e))
        }
    }
}
