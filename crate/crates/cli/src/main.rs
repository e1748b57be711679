mod commands;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matcalc::{ErrorKind, FieldError};

const EXIT_CODES: &str = "\
Exit codes:
  0  every check passed
  1  a check failed
  2  bad flags or unparsable input
  3  shape mismatch
  4  field mismatch
  5  singular matrix
  6  matrix not symmetric positive definite
  7  outside a matrix function's domain
  8  file could not be read or written";

#[derive(Parser, Debug)]
#[command(
    name = "matcalc",
    version,
    about = "Checks and demos for matrix-valued differentiation"
)]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "MATCALC_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dot test of every primitive's adjoint rule.
    DotTest(DotTestArgs),
    /// Reverse-mode gradient against central differences.
    Gradcheck(GradcheckArgs),
    /// Evaluate f(A) and, given a direction, its Fréchet derivative.
    Matfunc(MatfuncArgs),
    /// Feed-forward network gradients, rank-one and batch checks.
    FfnDemo(FfnArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldArg {
    #[value(name = "R")]
    Real,
    #[value(name = "C")]
    Complex,
}

impl From<FieldArg> for matcalc::Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => matcalc::Field::Real,
            FieldArg::Complex => matcalc::Field::Complex,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Central,
}

/// Finite-difference settings.
#[derive(Args, Debug, Clone)]
pub struct FdArgs {
    #[arg(long, default_value_t = 0.01)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rtol: f64,
    /// Fixed step; defaults to cbrt(eps) (1 + ||x||_F).
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Central)]
    pub scheme: SchemeArg,
}

#[derive(Args, Debug)]
pub struct DotTestArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub size: u32,
    /// Restrict to one field; both are tested by default.
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Built-in scalar program: trace-inverse, trace-exp, trace-log1p,
    /// trace-cube, ffn.
    #[arg(long, conflicts_with_all = ["input", "pipeline"])]
    pub program: Option<String>,
    /// Matrix file to differentiate at.
    #[arg(long, requires = "pipeline")]
    pub input: Option<PathBuf>,
    /// Comma-separated stages ending in a real 1x1 value,
    /// e.g. `inverse,exp,trace,re`.
    #[arg(long, requires = "input")]
    pub pipeline: Option<String>,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub size: u32,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[command(flatten)]
    pub fd: FdArgs,
}

#[derive(Args, Debug)]
pub struct MatfuncArgs {
    /// exp, log1p, sin, cos or poly:c0,c1,...
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub input: PathBuf,
    /// Direction E for the Fréchet derivative.
    #[arg(long)]
    pub direction: Option<PathBuf>,
    /// Where to write f(A); stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the derivative; stdout if absent.
    #[arg(long, requires = "direction")]
    pub frechet_output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FfnArgs {
    /// Layer widths from input to output.
    #[arg(long, value_delimiter = ',', default_value = "32,16,8")]
    pub widths: Vec<usize>,
    /// Samples in the batch used for the decomposition check.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..))]
    pub batch: u32,
    #[command(flatten)]
    pub fd: FdArgs,
}

#[derive(Debug)]
pub enum CliError {
    Field(FieldError),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 8,
            CliError::Field(e) => match e.kind {
                ErrorKind::Parse => 2,
                ErrorKind::ShapeMismatch => 3,
                ErrorKind::FieldMismatch => 4,
                ErrorKind::Singular => 5,
                ErrorKind::NotSpd => 6,
                ErrorKind::DomainViolation => 7,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Field(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Field(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            let rendered = match cli.format {
                Format::Text => {
                    let mut s = out.notes.concat();
                    s.push_str(&out.report.to_text());
                    s
                }
                Format::Machine => out.report.to_machine(),
            };
            let written = match &cli.report {
                Some(path) => std::fs::write(path, rendered).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                }),
                None => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(e.code());
            }
            if out.report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
