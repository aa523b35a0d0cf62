//! `geocirc`: runs the experiments on a configured surface and writes CSV/JSON
//! tables to the output directory.

mod commands;
mod config;
mod output;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geocirc_core::Error;
use serde_json::json;

use commands::Context;
use config::{Config, LambdaRange, SurfaceSpec, TorusCurve, TorusMode};
use output::Output;

/// Why a run stopped. Each kind maps to its own exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    NoConvergence { cell: String, error: Error },
    Numerical { cell: String, error: Error },
    Io(String),
    VerifyFailed(usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::NoConvergence { .. } => 3,
            Failure::Numerical { .. } | Failure::Io(_) | Failure::VerifyFailed(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::NoConvergence { cell, error } => write!(f, "no convergence in {cell}: {error}"),
            Failure::Numerical { cell, error } => write!(f, "numerical failure in {cell}: {error}"),
            Failure::Io(msg) => write!(f, "i/o error: {msg}"),
            Failure::VerifyFailed(n) => write!(f, "{n} invariant check(s) failed"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geocirc",
    version,
    about = "Circle curvature, phase functions and period integrals on nonpositively curved planes"
)]
struct Cli {
    /// JSON configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Surface preset: flat, hyperbolic, hyperbolic-a:RATE or gaussian-bump.
    #[arg(long, global = true)]
    surface: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "geocirc-out")]
    out: PathBuf,
    /// Seed for random tangents and coefficients.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write profiles, heatmaps and the resolved configuration.
    #[arg(long, global = true)]
    dump: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic curvature of geodesic circles along random or listed tangents.
    CurvatureK {
        #[arg(long)]
        s_max: Option<f64>,
        /// Number of random tangents (used when the config lists none).
        #[arg(long)]
        tangents: Option<usize>,
    },
    /// Geodesic-circle curvature tables and Riccati residuals.
    Circle {
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Critical points of distance phase functions.
    Phase {
        /// Run only this configuration.
        #[arg(long)]
        name: Option<String>,
    },
    /// Period integrals of torus eigenfunctions over a λ range, with a decay fit.
    TorusDecay {
        #[arg(long, value_parser = parse_curve)]
        curve: Option<TorusCurve>,
        /// START:STOP:STEP
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<TorusMode>,
    },
    /// Runs the invariant suite; exits nonzero if any check fails.
    Verify,
}

fn parse_curve(s: &str) -> Result<TorusCurve, String> {
    match s {
        "circle" => Ok(TorusCurve::Circle),
        "line" => Ok(TorusCurve::Line),
        _ => Err(format!("expected circle or line, got '{s}'")),
    }
}

fn parse_mode(s: &str) -> Result<TorusMode, String> {
    match s {
        "x" => Ok(TorusMode::X),
        "y" => Ok(TorusMode::Y),
        "random" => Ok(TorusMode::Random),
        _ => Err(format!("expected x, y or random, got '{s}'")),
    }
}

fn resolve(cli: &Cli) -> Result<Config, Failure> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(flag) = &cli.surface {
        config.surface = SurfaceSpec::from_flag(flag)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::CurvatureK { s_max, tangents } => {
            if let Some(s) = *s_max {
                config.curvature_k.s_max = s;
            }
            if let Some(n) = *tangents {
                config.curvature_k.tangents.clear();
                config.curvature_k.random_tangents = n;
            }
        }
        Command::Circle { radii } => {
            if let Some(r) = radii {
                config.circle.radii = r.clone();
            }
        }
        Command::Phase { name } => {
            if let Some(name) = name {
                let picked: Vec<_> = config
                    .phase
                    .configs
                    .iter()
                    .filter(|c| c.name() == name)
                    .cloned()
                    .collect();
                config.phase.configs = if picked.is_empty() {
                    vec![config::PhaseSpec::Named(name.clone())]
                } else {
                    picked
                };
                config.phase.sweeps.retain(|s| s.config == *name);
            }
        }
        Command::TorusDecay { curve, lambda, mode } => {
            let t = &mut config.torus_decay;
            if let Some(c) = *curve {
                t.curve = c;
            }
            if let Some(l) = lambda {
                t.lambda = LambdaRange::parse(l)?;
            }
            if let Some(m) = *mode {
                t.mode = m;
            }
        }
        Command::Verify => {}
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let config = resolve(&cli)?;
    let out = Output::new(&cli.out, config.hash())?;
    if cli.dump {
        let body = serde_json::to_value(&config).expect("config serializes");
        out.json("config.resolved.json", json!({ "config": body }), "")?;
    }
    let ctx = Context {
        config,
        out,
        dump: cli.dump,
    };
    match cli.command {
        Command::CurvatureK { .. } => commands::curvature_k(&ctx),
        Command::Circle { .. } => commands::circle(&ctx),
        Command::Phase { .. } => commands::phase(&ctx),
        Command::TorusDecay { .. } => commands::torus_decay(&ctx),
        Command::Verify => {
            let results = verify::run(ctx.config.seed);
            let failed = results.iter().filter(|r| !r.passed).count();
            for r in &results {
                println!("{}  {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let path = ctx.out.json(
                "verify.json",
                json!({ "passed": results.len() - failed, "failed": failed, "details": results }),
                "see details",
            )?;
            println!(
                "{} passed, {failed} failed; wrote {}",
                results.len() - failed,
                path.display()
            );
            if failed > 0 {
                Err(Failure::VerifyFailed(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("geocirc: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
