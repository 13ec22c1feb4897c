//! The `octagon` command line: orbit scans, the identity suite, and the
//! nice-loop, chart and fixed-point explorations.

pub mod explore;
pub mod orbit;
pub mod svg;
pub mod verify;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use octagon_core::scalar::rat_parse;
use octagon_core::{Error, LevelSpec, LftLevel};

use orbit::Backend;

#[derive(Parser, Debug)]
#[command(name = "octagon", version, about = "Explore the 3-diagonal map on centrally symmetric octagons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the exact identity suite and print a JSON report.
    Verify(VerifyArgs),
    /// Scan a T3 orbit.
    Orbit(OrbitArgs),
    #[command(subcommand)]
    Explore(Explore),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated subset of checks.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Random points per check.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Mutation test: negate half of the symplectic form.
    #[arg(long, hide = true)]
    pub flip_omega: bool,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    /// Start as "a,b,c,d".
    #[arg(long, conflicts_with = "input")]
    pub coords: Option<String>,
    /// File holding "a,b,c,d" or a JSON coords/vertices object.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Backend::Float)]
    pub backend: Backend,
    /// Forward T3 steps.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Backward steps.
    #[arg(long, default_value_t = 0)]
    pub backward: usize,
    /// Coordinates plotted in SVG output.
    #[arg(long, default_value = "a,b")]
    pub project: String,
}

#[derive(Subcommand, Debug)]
pub enum Explore {
    /// Trace the nice loop of a level set.
    Niceloop {
        #[arg(long)]
        f1: String,
        #[arg(long)]
        f2: String,
        /// Arc-length step of the continuation.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value = "c,d")]
        project: String,
    },
    /// T3 translation in the flat chart of a level, plus a chart cloud.
    Chart {
        #[arg(long)]
        f1: String,
        #[arg(long)]
        f2: String,
        /// Cloud points per chart axis.
        #[arg(long, default_value_t = 0)]
        cloud: usize,
        /// Half-width of the cloud in chart time.
        #[arg(long, default_value_t = 0.5)]
        span: f64,
    },
    /// Fixed points of T3^4 on a circumscribed level, or a sweep over the region.
    Fixedpoints {
        #[arg(long, requires = "ell", conflicts_with = "grid")]
        k: Option<String>,
        #[arg(long, requires = "k")]
        ell: Option<String>,
        /// n for an n x n sweep.
        #[arg(long)]
        grid: Option<usize>,
    },
}

/// Exit status classes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or a point outside the domain (exit 2).
    Input(String),
    /// A computation or verification failed (exit 1).
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::Budget(_) => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// What a command produced: the artifact and whether it counts as success.
pub struct Outcome {
    pub artifact: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(artifact: String) -> Self {
        Outcome { artifact, passed: true }
    }
}

fn format_or(f: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = f.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Input(format!("format {f:?} is not available here; use one of {allowed:?}")))
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn level(f1: &str, f2: &str) -> Result<LevelSpec, CliError> {
    Ok(LevelSpec::from_f(rat_parse(f1)?, rat_parse(f2)?))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify(a) => {
            format_or(cli.format, Format::Json, &[Format::Json])?;
            let opts = verify::VerifyOptions { trials: a.trials, seed: cli.seed, only: a.only.clone(), flip_omega: a.flip_omega };
            let report = verify::run_suite(&opts)?;
            Ok(Outcome { artifact: pretty(&report.to_json()), passed: report.passed() })
        }
        Command::Orbit(a) => {
            let f = format_or(cli.format, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
            let text = match (&a.coords, &a.input) {
                (Some(c), _) => c.clone(),
                (None, Some(p)) => read_input(p)?,
                (None, None) => return Err(CliError::Input("orbit needs --coords or --input".into())),
            };
            let proj = orbit::parse_projection(&a.project)?;
            let entries = orbit::parse_start_text(&text)?;
            let table = orbit::run_orbit(&entries, a.backend, a.steps, a.backward)?;
            for (dir, stop) in [("forward", &table.stop_forward), ("backward", &table.stop_backward)] {
                if let Some(s) = stop {
                    eprintln!("orbit stopped {dir} at {s}");
                }
            }
            let artifact = match f {
                Format::Csv => table.to_csv(),
                Format::Json => pretty(&table.to_json()),
                Format::Svg => table.to_svg(proj)?,
            };
            Ok(Outcome::ok(artifact))
        }
        Command::Explore(Explore::Niceloop { f1, f2, step, project }) => {
            let f = format_or(cli.format, Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
            let proj = orbit::parse_projection(project)?;
            let r = explore::nice_loop(level(f1, f2)?, *step)?;
            Ok(Outcome::ok(match f {
                Format::Json => pretty(&r.to_json()),
                Format::Csv => r.to_csv(),
                Format::Svg => r.to_svg(proj),
            }))
        }
        Command::Explore(Explore::Chart { f1, f2, cloud, span }) => {
            let f = format_or(cli.format, Format::Json, &[Format::Json, Format::Csv])?;
            let r = explore::chart(level(f1, f2)?, *cloud, *span)?;
            Ok(Outcome::ok(match f {
                Format::Csv => r.to_csv(),
                _ => pretty(&r.to_json()),
            }))
        }
        Command::Explore(Explore::Fixedpoints { k, ell, grid }) => match (k, ell, grid) {
            (Some(k), Some(ell), None) => {
                format_or(cli.format, Format::Json, &[Format::Json])?;
                let lvl = LftLevel::new(rat_parse(k)?, rat_parse(ell)?);
                Ok(Outcome::ok(pretty(&explore::fixed_point_json(&lvl)?)))
            }
            (None, None, Some(n)) => {
                let f = format_or(cli.format, Format::Csv, &[Format::Csv, Format::Json])?;
                let rows = explore::sweep(*n)?;
                Ok(Outcome::ok(match f {
                    Format::Csv => explore::sweep_to_csv(&rows),
                    _ => pretty(&explore::sweep_to_json(&rows)),
                }))
            }
            _ => Err(CliError::Input("fixedpoints needs --k and --ell, or --grid".into())),
        },
    }
}

fn configure_workers(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Input("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failure(format!("worker pool: {e}")))?;
    }
    Ok(())
}

/// Run and deliver the artifact; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = configure_workers(cli.workers).and_then(|_| run(cli));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.artifact).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(outcome.artifact.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}
