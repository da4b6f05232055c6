//! `lindist`: linear distortion, optimal rank-one directions and laminates
//! from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, 3 math domain,
//! 4 I/O.

mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lindist::crossing::{branch_csv, branch_table};
use lindist::laminate::{jump_sweep, square_path, strong_regime, sweep_csv, weak_regime};
use lindist::rank_one::q_landscape_table;
use lindist::verify::{self, VerifyOptions};
use lindist::{svd3, Error};
use serde::Serialize;

use input::{GridSpec, MatrixInput};
use report::{SweepReport, SweepStats};

#[derive(Parser, Debug)]
#[command(
    name = "lindist",
    version,
    about = "Linear distortion and rank-one laminates of 3x3 matrices"
)]
struct Cli {
    /// Worker threads for sampling and sweeps; output does not depend on it.
    #[arg(long, global = true, env = "LINDIST_THREADS")]
    threads: Option<usize>,

    /// Tolerance profile for `verify`: strict, default, loose, or a positive scale.
    #[arg(
        long,
        global = true,
        env = "LINDIST_TOLERANCE",
        default_value = "default"
    )]
    tolerance: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distortion, optimal direction, crossings and jump for one matrix.
    Analyze {
        #[command(flatten)]
        input: MatrixInput,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Jump ratios over an (alpha, beta) grid, alpha-major.
    Sweep {
        /// Alpha values: `2,3`, `lin:LO:HI:N` or `log:LO:HI:N`.
        #[arg(long, required_unless_present = "preset", requires = "betas")]
        alphas: Option<GridSpec>,
        /// Beta values, same forms as --alphas.
        #[arg(long, requires = "alphas")]
        betas: Option<GridSpec>,
        /// Built-in cell list instead of a grid.
        #[arg(long, value_enum, conflicts_with_all = ["alphas", "betas"])]
        preset: Option<Preset>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sample the laminate f_j on the unit cube.
    Laminate {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = 10)]
        j: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the self-check suite; exits 1 if any check fails.
    Verify {
        /// Cells per axis of the (alpha, beta) check grid.
        #[arg(long, default_value_t = 4)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Gram eigenvalue branches along the optimal pencil.
    Branches {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 131)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Reduced second-order coefficient Q over the two polar angles.
    Landscape {
        #[command(flatten)]
        input: MatrixInput,
        /// Samples per angle axis over [0, pi].
        #[arg(long, default_value_t = 33)]
        n: usize,
        /// Radial samples before refinement.
        #[arg(long, default_value_t = 64)]
        n_rs: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    /// alpha = 2 with beta over decades, beta = alpha/k, and beta = alpha^2.
    Regimes,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String),
    Io(String),
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Usage(_) => 2,
            Failure::Math(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::InvalidEnergy(_) => Failure::Usage(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

fn tolerance_scale(profile: &str) -> Result<f64, Failure> {
    match profile {
        "strict" => Ok(0.5),
        "default" => Ok(1.0),
        "loose" => Ok(10.0),
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(Failure::Usage(format!(
                "unknown tolerance profile {other:?}"
            ))),
        },
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn regime_cells() -> Vec<(f64, f64)> {
    let decades: Vec<f64> = (1..=6).map(|k| 10f64.powi(k)).collect();
    let ks: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let mut cells = strong_regime(2.0, &decades);
    cells.extend(weak_regime(&ks, &decades));
    cells.extend(square_path(&[1e1, 1e2, 1e3, 1e4]));
    cells
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Analyze { input, out } => {
            let r = report::analyze(&input.resolve()?)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => json(&r),
                Format::Csv => report::analyze_csv(&r),
            };
            emit(&out, &text)
        }
        Command::Sweep {
            alphas,
            betas,
            preset,
            out,
        } => {
            let cells: Vec<(f64, f64)> = match (preset, alphas, betas) {
                (Some(Preset::Regimes), _, _) => regime_cells(),
                (None, Some(a), Some(b)) => {
                    a.0.iter()
                        .flat_map(|&x| b.0.iter().map(move |&y| (x, y)))
                        .collect()
                }
                _ => Vec::new(),
            };
            if cells.is_empty() {
                return Err(Failure::Usage("sweep grid is empty".into()));
            }
            let rows = jump_sweep(&cells);
            let summary = SweepStats::of(&rows);
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Json => json(&SweepReport { rows, summary }),
            };
            emit(&out, &text)?;
            // Keep stdout pure data when it carries the table.
            let line = format!("summary: {}\n", summary.line());
            if out.output.is_some() {
                print!("{line}");
            } else {
                eprint!("{line}");
            }
            Ok(())
        }
        Command::Laminate {
            input,
            j,
            samples,
            seed,
            out,
        } => {
            let a = input.resolve()?;
            let (r, rows) = report::laminate(&a, j, samples, seed)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => json(&r),
                Format::Csv => report::samples_csv(&rows),
            };
            emit(&out, &text)
        }
        Command::Verify {
            grid,
            seed,
            inject_fault,
            out,
        } => {
            let opts = VerifyOptions {
                tolerance_scale: tolerance_scale(&cli.tolerance)?,
                inject_fault,
                seed,
                grid,
            };
            let r = verify::run(&opts)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => json(&serde_json::json!({
                    "passed": r.passed(),
                    "failures": r.failures,
                    "checks": r.checks,
                })),
                Format::Csv => {
                    let mut s = String::from("name,passed,detail\n");
                    for c in &r.checks {
                        s.push_str(&format!(
                            "{},{},\"{}\"\n",
                            c.name,
                            c.passed,
                            c.detail.replace('"', "\"\"")
                        ));
                    }
                    s
                }
            };
            emit(&out, &text)?;
            if r.passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::Branches {
            input,
            t_min,
            t_max,
            points,
            out,
        } => {
            if points < 2 || t_min.partial_cmp(&t_max) != Some(std::cmp::Ordering::Less) {
                return Err(Failure::Usage(
                    "need --points >= 2 and --t-min < --t-max".into(),
                ));
            }
            let form = svd3(&input.resolve()?)?;
            let rows = branch_table(&form, t_min, t_max, points)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => branch_csv(&rows),
                Format::Json => json(&rows),
            };
            emit(&out, &text)
        }
        Command::Landscape {
            input,
            n,
            n_rs,
            out,
        } => {
            let form = svd3(&input.resolve()?)?;
            let rows = q_landscape_table(&form, n, n_rs)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("theta1,theta2,Q\n");
                    for p in &rows {
                        let q = p.q.map(|v| v.to_string()).unwrap_or_default();
                        s.push_str(&format!("{},{},{q}\n", p.theta1, p.theta2));
                    }
                    s
                }
                Format::Json => json(&rows),
            };
            emit(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Math(m) => eprintln!("math error: {m}"),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
