//! `fracmg`: runs the fractional multilevel experiment grids and the
//! inequality suite, optionally diffing results against a reference table.
//!
//! Exit codes: 0 success, 1 reference comparison (or inequality suite)
//! failed, 2 invalid configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fracmg::bench::{
    compare_to_reference, default_s_values, run_benchmark, run_theory_suite, write_csv,
    write_json, BenchConfig, Mode, PreconditionerKind, ReferenceTable, RhsKind, Tolerances,
    DEFAULT_LEVELS, DEFAULT_N_VALUES,
};
use fracmg::krylov::{GuessDistribution, DEFAULT_MAX_ITER, DEFAULT_TOL};
use fracmg::{Error, Execution};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Positive,
    Negative,
    Theory,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PreconditionerArg {
    Multilevel,
    Spectral,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RhsArg {
    Zero,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GuessArg {
    /// uniform on [0, 1)
    Unit,
    /// uniform on [-1, 1]
    Symmetric,
}

#[derive(Debug, Parser)]
#[command(name = "fracmg", version, about = "Multilevel preconditioners for the discrete fractional Laplacian")]
struct Args {
    #[arg(long, value_enum, default_value = "positive")]
    mode: ModeArg,

    /// Comma-separated exponents (default: 0, 0.1, ..., 1 or -1, ..., 0)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Option<Vec<f64>>,

    /// Comma-separated fine mesh sizes
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_N_VALUES)]
    n: Vec<usize>,

    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,

    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,

    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "multilevel")]
    preconditioner: PreconditionerArg,

    #[arg(long, value_enum, default_value = "zero")]
    rhs: RhsArg,

    #[arg(long, value_enum, default_value = "unit")]
    guess: GuessArg,

    /// Also compute dense condition numbers for meshes up to this size
    #[arg(long, default_value_t = 0)]
    exact_up_to: usize,

    /// Write wall_time as 0 so output is byte-stable
    #[arg(long)]
    no_timing: bool,

    /// Run grid cells on one thread
    #[arg(long)]
    sequential: bool,

    /// Reference table (s,N,iterations,condition) to diff against
    #[arg(long)]
    compare: Option<PathBuf>,
}

fn config_from(args: &Args, mode: Mode) -> BenchConfig {
    BenchConfig {
        mode,
        s_values: args.s.clone().unwrap_or_else(|| default_s_values(mode)),
        n_values: args.n.clone(),
        j_levels: args.levels,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        preconditioner: match args.preconditioner {
            PreconditionerArg::Multilevel => PreconditionerKind::Multilevel,
            PreconditionerArg::Spectral => PreconditionerKind::Spectral,
        },
        rhs: match args.rhs {
            RhsArg::Zero => RhsKind::Zero,
            RhsArg::Random => RhsKind::Random,
        },
        guess: match args.guess {
            GuessArg::Unit => GuessDistribution::Unit,
            GuessArg::Symmetric => GuessDistribution::Symmetric,
        },
        exact_up_to: args.exact_up_to,
        timing: !args.no_timing,
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    }
}

fn output(args: &Args) -> io::Result<Box<dyn Write>> {
    Ok(match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: &Args) -> Result<ExitCode, Error> {
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mode = match args.mode {
        ModeArg::Positive => Mode::Positive,
        ModeArg::Negative => Mode::Negative,
        ModeArg::Theory => {
            let report = run_theory_suite(args.seed, execution)?;
            write_json(&report, output(args)?)?;
            if !report.all_hold() {
                eprintln!("inequality suite reported violations");
                return Ok(ExitCode::from(1));
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    let config = config_from(args, mode);
    config.validate()?;
    let reference = args.compare.as_ref().map(ReferenceTable::from_path).transpose()?;

    let rows = run_benchmark(&config)?;
    let mut out = output(args)?;
    match args.format {
        FormatArg::Csv => write_csv(&rows, &mut out)?,
        FormatArg::Json => write_json(&rows, &mut out)?,
    }
    out.flush()?;

    if let Some(reference) = reference {
        let report = compare_to_reference(&rows, &reference, &Tolerances::for_mode(mode));
        for c in report.flagged() {
            eprintln!(
                "flagged s={} N={}: iterations {} (ref {}), condition {:.3} (ref {}, {:.1}% off)",
                c.s,
                c.n,
                c.iterations,
                c.reference_iterations,
                c.condition,
                c.reference_condition,
                100.0 * c.condition_deviation
            );
        }
        eprintln!(
            "compared {} cells ({} unmatched), {} flagged",
            report.cells.len(),
            report.unmatched,
            report.flagged().count()
        );
        if !report.passed() {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => code,
        Err(e @ (Error::InvalidConfig(_) | Error::Io(_) | Error::Csv(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
