//! Command line front end.
//!
//! ```text
//! nlsb linearized --config run.cfg --out out/lin --mode regularized
//! nlsb stability --sweep "0.2,0.1,0.05"
//! nlsb validate --mode fast
//! ```
//!
//! Exit codes: 0 ok, 1 failed acceptance criterion, 2 configuration or
//! input error, 3 numerical divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use nlsb::harness::experiments::{cmd_convergence, cmd_full, cmd_linearized, cmd_reference, cmd_stability};
use nlsb::harness::validate::cmd_validate;
use nlsb::harness::{ConfigBuilder, ExperimentReport, Suite, Validation};
use nlsb::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "nlsb", version, about = "Schrödinger–Burgers shock simulator and stability harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV files, plot scripts and report.txt.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Long-wave representation (decomposed | regularized); for `validate`
    /// the suite (fast | full).
    #[arg(long, global = true)]
    mode: Option<String>,

    /// Perturbation size.
    #[arg(long, global = true)]
    delta: Option<String>,

    /// Comma-separated perturbation sizes for `stability`.
    #[arg(long, global = true, value_name = "a,b,c")]
    sweep: Option<String>,

    /// Number of grid nodes (odd).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<String>,

    /// Time step.
    #[arg(long, global = true, value_name = "X")]
    dt: Option<String>,

    /// Final time.
    #[arg(long = "T", global = true, value_name = "X")]
    t_final: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sample the reference wave (r, φ).
    Reference,
    /// Full nonlinear run from the perturbed reference wave.
    Full,
    /// Linearized run with the (ṽ, Ψ) decomposition.
    Linearized,
    /// Linearized-stability protocol, optionally over a δ-sweep.
    Stability,
    /// Time-step refinement orders of the linearized run.
    Convergence,
    /// Run the acceptance criteria (fixed desk-scale parameters).
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Reference => "reference",
            Command::Full => "full",
            Command::Linearized => "linearized",
            Command::Stability => "stability",
            Command::Convergence => "convergence",
            Command::Validate => "validate",
        }
    }
}

fn builder(cli: &Cli) -> Result<ConfigBuilder> {
    let mut b = match &cli.config {
        Some(p) => ConfigBuilder::load(p)?,
        None => ConfigBuilder::new(),
    };
    let overrides = [
        ("v_mode", &cli.mode),
        ("delta", &cli.delta),
        ("sweep", &cli.sweep),
        ("n_nodes", &cli.grid),
        ("dt", &cli.dt),
        ("t_final", &cli.t_final),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            b.set(key, v.as_str())?;
        }
    }
    Ok(b)
}

fn validate(cli: &Cli) -> Result<ExperimentReport> {
    let suite = match cli.mode.as_deref() {
        None => Suite::Fast,
        Some(m) => Suite::parse(m).ok_or_else(|| Error::Config(format!("validate: unknown suite `{m}`")))?,
    };
    let start = Instant::now();
    let rep = cmd_validate(&Validation {
        suite,
        out: Some(cli.out.clone()),
    })?;
    eprintln!("validate {}: {:.1} s", suite.name(), start.elapsed().as_secs_f64());
    Ok(rep)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let out: &Path = &cli.out;
    let report = match cli.command {
        Command::Validate => validate(cli)?,
        cmd => {
            let rc = builder(cli)?.build()?;
            eprintln!("{}: writing to {}", cmd.name(), out.display());
            match cmd {
                Command::Reference => cmd_reference(&rc, out)?,
                Command::Full => cmd_full(&rc, out)?,
                Command::Linearized => cmd_linearized(&rc, out)?,
                Command::Stability => cmd_stability(&rc, out)?,
                Command::Convergence => cmd_convergence(&rc, out)?,
                Command::Validate => unreachable!(),
            }
        }
    };
    nlsb::harness::experiments::ensure_dir(out)?;
    report.write(&out.join("report.txt"))?;
    print!("{}", report.render());
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
