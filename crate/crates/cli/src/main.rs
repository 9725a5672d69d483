//! `corners`: command-line front end. Every command prints one JSON report on
//! standard output. Exit codes: 0 check passed, 1 check failed, 2 input
//! error, 3 numerical failure.

mod commands;
mod examples;
mod schema;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corners::CornerError;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<CornerError> for CliError {
    fn from(e: CornerError) -> Self {
        use CornerError::*;
        match e {
            InvalidPermutation(_)
            | DegreeMismatch { .. }
            | NonSimplePolytope { .. }
            | MalformedPolytope(_)
            | UnknownFace(_)
            | InteriorClosedFace
            | NotBoundaryFace(_)
            | LengthMismatch { .. }
            | Shape(_)
            | Lattice(_)
            | GroupAction(_)
            | EmptySet
            | Domain(_) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub struct Report {
    pub pass: bool,
    pub body: Value,
}

impl Report {
    pub fn pass(body: Value) -> Self {
        Report { pass: true, body }
    }

    pub fn fail(body: Value) -> Self {
        Report { pass: false, body }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "corners",
    version,
    about = "Face lattices, dual spaces and symbol calculus on manifolds with corners"
)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by all commands; each command documents its own defaults.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Config {
    /// Tolerance of the requested check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Grid size (sample points per axis, lattice size N); at most 1024.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Seed for randomized sweeps (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dyadic radii `r0,k`: r0, r0/2, …, r0/2^k.
    #[arg(long, global = true, value_parser = parse_radii)]
    pub radii: Option<(f64, usize)>,
    /// Radius of the large-parameter annulus.
    #[arg(long, global = true)]
    pub annulus: Option<f64>,
}

fn parse_radii(s: &str) -> Result<(f64, usize), String> {
    let (r, k) = s.split_once(',').ok_or("expected r0,k")?;
    let r: f64 = r.trim().parse().map_err(|e| format!("r0: {e}"))?;
    let k: usize = k.trim().parse().map_err(|e| format!("k: {e}"))?;
    if !(r > 0.0) {
        return Err("r0 must be positive".into());
    }
    Ok((r, k))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the invariants of a complex (polytope file, complex file or builtin:NAME).
    Validate { input: String },
    /// Dual complex, optionally with the anti-isomorphism certificate.
    Dual {
        input: String,
        #[arg(long)]
        check_poset: bool,
    },
    /// Glue the exponential map of one face from an atlas (file or builtin:square, builtin:one-gon).
    Expmap {
        #[arg(long)]
        atlas: String,
        #[arg(long)]
        face: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        check_diagram: bool,
    },
    /// Localization checks on a sampled operator family.
    Localize {
        #[arg(long)]
        family: String,
        #[arg(long, value_enum)]
        check: LocalizeCheck,
    },
    /// Restricted symbol tuples.
    #[command(subcommand)]
    Symbols(SymbolsCommand),
    /// Quantize a multiplier symbol file, or run a seeded round-trip sweep.
    Operators {
        #[arg(long)]
        symbol: Option<String>,
        /// Number of random symbols in the sweep.
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Print an example input file.
    Example { name: String },
}

#[derive(Subcommand, Debug)]
enum SymbolsCommand {
    /// Restrict a symbol (file or builtin:NAME) to all faces of its model.
    Build {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        params: Option<usize>,
    },
    /// Compatibility conditions of a tuple.
    Check {
        #[arg(long)]
        tuple: String,
        #[arg(long)]
        model: Option<String>,
    },
    /// Ellipticity of a tuple.
    Elliptic {
        #[arg(long)]
        tuple: String,
        #[arg(long)]
        model: Option<String>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum LocalizeCheck {
    Norm,
    Ideal,
    Continuity,
    Fredholm,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Dual { .. } => "dual",
            Command::Expmap { .. } => "expmap",
            Command::Localize { .. } => "localize",
            Command::Symbols(SymbolsCommand::Build { .. }) => "symbols-build",
            Command::Symbols(SymbolsCommand::Check { .. }) => "symbols-check",
            Command::Symbols(SymbolsCommand::Elliptic { .. }) => "symbols-elliptic",
            Command::Operators { .. } => "operators",
            Command::Example { .. } => "example",
        }
    }
}

fn check_config(c: &Config) -> Result<(), CliError> {
    if let Some(t) = c.tol {
        if !(t > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
    }
    if let Some(n) = c.grid {
        if n == 0 || n > 1024 {
            return Err(CliError::Input(format!(
                "--grid must lie in 1..=1024, got {n}"
            )));
        }
    }
    if let Some(a) = c.annulus {
        if !(a > 0.0) {
            return Err(CliError::Input(format!(
                "--annulus must be positive, got {a}"
            )));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    check_config(&cli.config)?;
    let cfg = &cli.config;
    match &cli.command {
        Command::Validate { input } => commands::validate(input),
        Command::Dual { input, check_poset } => commands::dual(input, *check_poset),
        Command::Expmap {
            atlas,
            face,
            eps,
            check_diagram,
        } => commands::expmap(cfg, atlas, *face, *eps, *check_diagram),
        Command::Localize { family, check } => commands::localize(cfg, family, *check),
        Command::Symbols(SymbolsCommand::Build {
            expr,
            model,
            params,
        }) => commands::symbols_build(expr, model.as_deref(), *params),
        Command::Symbols(SymbolsCommand::Check { tuple, model }) => {
            commands::symbols_check(cfg, tuple, model.as_deref())
        }
        Command::Symbols(SymbolsCommand::Elliptic { tuple, model }) => {
            commands::symbols_elliptic(cfg, tuple, model.as_deref())
        }
        Command::Operators { symbol, count } => commands::operators(cfg, symbol.as_deref(), *count),
        Command::Example { name } => commands::example(name).map(Report::pass),
    }
}

fn print(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(&cli) {
        // Example files are printed bare so they can be redirected into inputs.
        Ok(report) if command == "example" => {
            print(&report.body);
            ExitCode::SUCCESS
        }
        Ok(report) => {
            let mut out = json!({ "format": schema::FORMAT, "command": command, "config": cli.config, "pass": report.pass });
            if let Value::Object(body) = report.body {
                out.as_object_mut().expect("object").extend(body);
            }
            print(&out);
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(e) => {
            print(
                &json!({ "format": schema::FORMAT, "command": command, "config": cli.config, "error": e.to_string() }),
            );
            ExitCode::from(e.code())
        }
    }
}
