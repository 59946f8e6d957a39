//! `usd-kit`: command-line front end for the lossy-evolution / USD library.
//!
//! Exit status: 0 success, 1 I/O or parse error, 2 invalid input, 3 numerical
//! failure. Failures print a single JSON object `{code, message, context}` to
//! stderr. `USD_KIT_TOL` overrides the equality tolerance.

mod commands;
mod error;
mod formats;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use usd_kit::ToleranceContext;

use commands::{Measurement, Sampling};
use error::{CliError, EXIT_DOMAIN, EXIT_IO};

const TOL_VAR: &str = "USD_KIT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "usd-kit",
    version,
    about = "Lossy evolution and unambiguous state discrimination"
)]
struct Cli {
    /// Print results as JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bi-orthogonal duals of an ensemble and their pairing matrix.
    Dual {
        #[arg(long)]
        states: PathBuf,
    },
    /// POVM generated by a Kraus operator and a measurement basis.
    PovmFromK {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kraus operator reconstructed from a rank-one POVM.
    KFromPovm {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Comma-separated phases, one per conclusive outcome.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phases: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check Hermiticity, positivity, rank and completeness.
    Validate {
        #[arg(long)]
        povm: PathBuf,
    },
    /// Unitary dilation of a passive Kraus operator.
    Embed {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Outcome probabilities, optionally with Monte Carlo sampling.
    Discriminate(DiscriminateArgs),
    /// Built-in optical examples: fig1 and fig1-embed take gamma, fig2 takes z.
    Example {
        #[arg(long)]
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        param: f64,
    },
}

#[derive(Debug, Args)]
struct DiscriminateArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    povm: Option<PathBuf>,
    #[arg(long)]
    k: Option<PathBuf>,
    /// Measurement basis for `--k`.
    #[arg(long, requires = "k")]
    basis: Option<PathBuf>,
    /// Trials per prepared state; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn tolerance() -> Result<ToleranceContext, CliError> {
    let Ok(raw) = std::env::var(TOL_VAR) else {
        return Ok(ToleranceContext::default());
    };
    let bad = |msg: &str| CliError::domain("invalid_tolerance", msg, json!({ "variable": TOL_VAR, "value": raw }));
    let tol: f64 = raw.trim().parse().map_err(|_| bad("not a number"))?;
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(bad("must lie in [1e-14, 1e-6]"));
    }
    ToleranceContext::default().with_eq_tol(tol).map_err(CliError::from)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let ctx = tolerance()?;
    let out = match cli.command {
        Command::Dual { states } => commands::dual(&states, &ctx)?,
        Command::PovmFromK { k, basis, out } => commands::povm_from_k(&k, basis.as_deref(), &out, &ctx)?,
        Command::KFromPovm {
            povm,
            basis,
            phases,
            out,
        } => commands::k_from_povm(&povm, basis.as_deref(), phases, &out, &ctx)?,
        Command::Validate { povm } => {
            let (out, err) = commands::validate(&povm, &ctx)?;
            print!("{}", out.render(cli.json));
            if let Some(e) = err {
                return Err(e);
            }
            return Ok(String::new());
        }
        Command::Embed { k, out } => commands::embed(&k, &out, &ctx)?,
        Command::Discriminate(a) => {
            let m = match (&a.povm, &a.k) {
                (Some(p), _) => Measurement::Povm(p),
                (None, Some(k)) => Measurement::Evolution {
                    k,
                    basis: a.basis.as_deref(),
                },
                (None, None) => unreachable!("clap requires one of --povm and --k"),
            };
            let sampling = Sampling {
                trials: a.trials,
                seed: a.seed,
                workers: a.workers,
            };
            commands::discriminate(&a.ensemble, m, &sampling, &ctx)?
        }
        Command::Example { name, param } => commands::example(&name, param, &ctx)?,
    };
    Ok(out.render(cli.json))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let err = CliError::new(
                EXIT_IO,
                "usage",
                msg.trim_end(),
                json!({ "kind": e.kind().to_string() }),
            );
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            let code = if (1..=3).contains(&e.exit) { e.exit } else { EXIT_DOMAIN };
            ExitCode::from(code as u8)
        }
    }
}
