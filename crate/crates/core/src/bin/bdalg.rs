use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdalg::scenario::{self, Kind, Overrides, ScenarioError, EXIT_OPERATION, EXIT_PARSE};

/// Certify cones, saturated divisorial systems, straightenings and
/// Diophantine walks from JSON scenario documents.
#[derive(Parser, Debug)]
#[command(name = "bdalg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for suite instances.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Override `bounds.degree`.
    #[arg(long = "degree-bound", global = true)]
    degree_bound: Option<u64>,

    /// Override `bounds.precision` (bits).
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Write an SVG plot when the scenario produces one.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hilbert basis of S ∩ C, checked over a box.
    Hilbert { scenario: PathBuf },
    /// Superadditivity, saturation, dichotomy and index bounds.
    Saturate { scenario: PathBuf },
    /// Values and indices of the straightened system.
    Straighten { scenario: PathBuf },
    /// Piecewise-linear decomposition on a cone.
    Plcone { scenario: PathBuf },
    /// Finite-generation pipeline with the graded-piece oracle.
    Fingen { scenario: PathBuf },
    /// Approximant, u-system and walk for a quadratic-irrational target.
    Diophantine { scenario: PathBuf },
    /// Boundary doubling of an additive system on N².
    Counterexample { scenario: PathBuf },
    /// The non-piecewise-linear superadditive example.
    Example33 { scenario: Option<PathBuf> },
    /// A randomized suite.
    Suite { scenario: PathBuf },
    /// Any scenario, dispatched on its `kind`.
    Run { scenario: PathBuf },
}

impl Command {
    fn target(&self) -> (Option<Kind>, Option<&PathBuf>) {
        match self {
            Command::Hilbert { scenario } => (Some(Kind::Hilbert), Some(scenario)),
            Command::Saturate { scenario } => (Some(Kind::Saturate), Some(scenario)),
            Command::Straighten { scenario } => (Some(Kind::Straighten), Some(scenario)),
            Command::Plcone { scenario } => (Some(Kind::Plcone), Some(scenario)),
            Command::Fingen { scenario } => (Some(Kind::Fingen), Some(scenario)),
            Command::Diophantine { scenario } => (Some(Kind::Diophantine), Some(scenario)),
            Command::Counterexample { scenario } => (Some(Kind::Counterexample), Some(scenario)),
            Command::Example33 { scenario } => (Some(Kind::Example33), scenario.as_ref()),
            Command::Suite { scenario } => (Some(Kind::Suite), Some(scenario)),
            Command::Run { scenario } => (None, Some(scenario)),
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, ScenarioError> {
    let (kind, path) = cli.command.target();
    let text = match path {
        Some(p) => scenario::read(p)?,
        None => "{}".to_string(),
    };
    let doc = scenario::parse_as(&text, kind)?;
    let g = &cli.global;
    let overrides = Overrides {
        seed: g.seed,
        degree_bound: g.degree_bound,
        precision: g.precision,
        jobs: g.jobs,
    };
    let outcome = scenario::run(doc, &overrides)?;
    let json = outcome.report.to_json();
    match &g.out {
        Some(p) => std::fs::write(p, json)
            .map_err(|e| ScenarioError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    if let Some(p) = &g.plot {
        match &outcome.svg {
            Some(svg) => std::fs::write(p, svg)
                .map_err(|e| ScenarioError::Io(format!("{}: {e}", p.display())))?,
            None => eprintln!("bdalg: no plot for this scenario"),
        }
    }
    Ok(outcome.report.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_PARSE as u8);
        }
    };
    let code = match execute(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bdalg: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_OPERATION as u8))
}
