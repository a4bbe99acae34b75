use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use aspdebug::commands::{self, SessionArgs};
use aspdebug_core::diagnosis::{DiagnosisOptions, DEFAULT_MAX_CARDINALITY, DEFAULT_MAX_DIAGNOSES};
use aspdebug_core::program::DEFAULT_ATOM_CAP;
use aspdebug_core::query::Strategy;
use aspdebug_core::session::{Session, SessionConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aspdebug", version, about = "Interactive query-based debugger for disjunctive logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Limits {
    /// Maximum number of diagnoses computed at once.
    #[arg(short = 'n', long = "diagnoses", default_value_t = DEFAULT_MAX_DIAGNOSES)]
    n: usize,
    /// Largest diagnosis cardinality searched.
    #[arg(long = "kmax", default_value_t = DEFAULT_MAX_CARDINALITY)]
    k_max: usize,
    /// Refuse programs whose ground form has more atoms than this.
    #[arg(long = "atom-cap", default_value_t = DEFAULT_ATOM_CAP)]
    atom_cap: usize,
}

#[derive(Args)]
struct SessionFlags {
    #[command(flatten)]
    limits: Limits,
    #[arg(long, default_value_t = Strategy::Split, value_parser = parse_strategy)]
    strategy: Strategy,
    /// JSON file of per-error-atom fault probabilities.
    #[arg(long)]
    priors: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the minimal diagnoses and the interpretations they explain.
    Diagnose {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Answer queries on the terminal until one diagnosis remains.
    Interactive {
        /// Program file; not needed with --resume.
        #[arg(required_unless_present = "resume")]
        file: Option<PathBuf>,
        #[command(flatten)]
        session: SessionFlags,
        /// Continue a saved session snapshot.
        #[arg(long, conflicts_with = "file")]
        resume: Option<PathBuf>,
        /// Write the session snapshot here when the loop ends.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Run a session against a simulated user who has a target interpretation in mind.
    OracleSim {
        file: PathBuf,
        #[command(flatten)]
        session: SessionFlags,
        /// Comma-separated atoms true in the intended interpretation.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
    /// Start the HTTP/JSON session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn session_args(flags: &SessionFlags) -> Result<SessionArgs> {
    Ok(SessionArgs {
        config: SessionConfig {
            n: flags.limits.n,
            k_max: flags.limits.k_max,
            strategy: flags.strategy,
            atom_cap: flags.limits.atom_cap,
        },
        priors: flags.priors.as_deref().map(commands::load_priors).transpose()?,
    })
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Diagnose { file, limits, json } => {
            let options = DiagnosisOptions {
                max_diagnoses: limits.n,
                max_cardinality: limits.k_max,
            };
            commands::diagnose(&read(&file)?, &options, limits.atom_cap, json, &mut out)?;
        }
        Command::Interactive {
            file,
            session,
            resume,
            save,
        } => {
            let s = match (resume, file) {
                (Some(path), _) => Session::deserialize(&read(&path)?)?,
                (None, Some(file)) => commands::start(&read(&file)?, &session_args(&session)?)?,
                (None, None) => unreachable!("clap requires FILE or --resume"),
            };
            let stdin = io::stdin();
            let s = commands::interactive(s, &mut stdin.lock(), &mut out)?;
            if let Some(path) = save {
                std::fs::write(&path, s.serialize()).with_context(|| format!("writing {}", path.display()))?;
                writeln!(out, "session saved to {}", path.display())?;
            }
        }
        Command::OracleSim { file, session, target } => {
            commands::oracle_sim(&read(&file)?, &session_args(&session)?, &target, &mut out)?;
        }
        Command::Serve { port, host } => {
            drop(out);
            let rt = tokio::runtime::Runtime::new()?;
            return rt.block_on(aspdebug::http::serve(&host, port));
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
