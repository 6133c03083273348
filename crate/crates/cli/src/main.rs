use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ecop_core::copula::{self, delta_star};
use ecop_core::dependence::{self, TABLE1_ALPHAS};
use ecop_core::inference::{self, fit_rayleigh_marginal, ks_test_rayleigh};
use ecop_core::io::{emit_report, ingest_csv, write_pairs_csv, Ingested};
use ecop_core::{
    brd, BrdParams, CopulaParams, CsvSchema, Error, QuadratureSpec, RunReport, UnitSquarePoint,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NONCONVERGENCE: u8 = 4;

/// Exponential-kernel copula and bivariate Rayleigh toolkit.
#[derive(Debug, Parser)]
#[command(name = "ecop", version, about)]
struct Cli {
    /// Human-readable output: indented, numbers rounded to 4 decimals.
    #[arg(long, global = true)]
    pretty: bool,

    /// Include wall time in the report (output is then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CopulaArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with one observation pair per row.
    #[arg(long)]
    input: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Zero-based column holding x.
    #[arg(long, default_value_t = 0)]
    x_column: usize,
    /// Zero-based column holding y.
    #[arg(long, default_value_t = 1)]
    y_column: usize,
    /// Skip malformed rows instead of aborting.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Column {
    X,
    Y,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check feasibility of (alpha, delta) and report delta*(alpha).
    Validate(CopulaArgs),
    /// Evaluate the CDF, density and conditional distribution at (u, v).
    Eval {
        #[command(flatten)]
        params: CopulaArgs,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
    },
    /// Upper bounds of delta, rho and gamma over a list of alpha values.
    Table1 {
        /// Comma-separated alpha values; defaults to the 28-value reference grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha_list: Option<Vec<f64>>,
    },
    /// Closed-form dependence measures.
    Measures {
        #[command(flatten)]
        params: CopulaArgs,
        /// Also integrate numerically and report the differences.
        #[arg(long)]
        oracle: bool,
    },
    /// Quadrant dependence, TP2 and tail-dependence checks on a grid.
    Properties {
        #[command(flatten)]
        params: CopulaArgs,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Draw a copula sample, or a Rayleigh sample when both scales are given.
    Sample {
        #[command(flatten)]
        params: CopulaArgs,
        #[arg(long, requires = "lambda2")]
        lambda1: Option<f64>,
        #[arg(long, requires = "lambda1")]
        lambda2: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Kolmogorov-Smirnov test of one column against a fitted Rayleigh law.
    Ks {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        column: Column,
    },
    /// Maximum-likelihood fit of the bivariate Rayleigh model.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A report to print plus the exit code to finish with.
struct Outcome {
    report: RunReport,
    exit: u8,
}

impl From<RunReport> for Outcome {
    fn from(report: RunReport) -> Self {
        Self { report, exit: 0 }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::NonConvergence { .. } | Error::ToleranceNotReached { .. } | Error::Truncation(_) => {
            EXIT_NONCONVERGENCE
        }
        _ => EXIT_VALIDATION,
    }
}

fn copula_params(args: &CopulaArgs) -> ecop_core::Result<CopulaParams> {
    CopulaParams::new(args.alpha, args.delta)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize to JSON")
}

fn load(args: &InputArgs) -> ecop_core::Result<Ingested> {
    let delimiter = u8::try_from(args.delimiter)
        .map_err(|_| Error::InvalidData("delimiter must be a single ASCII character".into()))?;
    let schema = CsvSchema {
        delimiter,
        x_column: args.x_column,
        y_column: args.y_column,
        lenient: args.lenient,
        ..CsvSchema::default()
    };
    let ingested = ingest_csv(&args.input, &schema).inspect_err(|_| {
        eprintln!("while reading {}", args.input.display());
    })?;
    for row in &ingested.rejected {
        eprintln!("skipped line {}: {}", row.line, row.reason);
    }
    Ok(ingested)
}

fn input_echo(args: &InputArgs) -> Value {
    json!({
        "input": args.input.display().to_string(),
        "delimiter": args.delimiter.to_string(),
        "x_column": args.x_column,
        "y_column": args.y_column,
        "lenient": args.lenient,
    })
}

fn validate(args: &CopulaArgs) -> ecop_core::Result<Outcome> {
    let bound = delta_star(args.alpha)?;
    let verdict = copula_params(args);
    let feasible = verdict.is_ok();
    if let Err(e) = &verdict {
        eprintln!("{e}");
    }
    let report = RunReport::new(
        "validate",
        json!({"alpha": args.alpha, "delta": args.delta}),
        json!({"feasible": feasible, "delta_star": bound}),
    );
    Ok(Outcome {
        report,
        exit: if feasible { 0 } else { EXIT_VALIDATION },
    })
}

fn eval(args: &CopulaArgs, u: f64, v: f64) -> ecop_core::Result<Outcome> {
    let p = copula_params(args)?;
    let pt = UnitSquarePoint::new(u, v)?;
    let results = json!({
        "cdf": copula::cdf(&p, pt),
        "pdf": copula::pdf(&p, pt),
        "conditional_cdf_v_given_u": copula::conditional_cdf(&p, u, v),
        "conditional_cdf_u_given_v": copula::conditional_cdf(&p, v, u),
    });
    Ok(RunReport::new(
        "eval",
        json!({"alpha": args.alpha, "delta": args.delta, "u": u, "v": v}),
        results,
    )
    .into())
}

fn table1(alpha_list: Option<&[f64]>) -> ecop_core::Result<Outcome> {
    let alphas = alpha_list.unwrap_or(&TABLE1_ALPHAS);
    // Arrays rather than objects so the column order survives key sorting.
    let rows: Vec<[f64; 4]> = dependence::table1(alphas)?
        .iter()
        .map(|r| [r.alpha, r.delta_upper, r.rho_upper, r.gamma_upper])
        .collect();
    let results = json!({
        "columns": ["alpha", "delta_upper", "rho_upper", "gamma_upper"],
        "rows": rows,
    });
    Ok(RunReport::new("table1", json!({"alphas": alphas}), results).into())
}

fn measures(args: &CopulaArgs, oracle: bool) -> ecop_core::Result<Outcome> {
    let p = copula_params(args)?;
    let closed = dependence::related_measures(&p);
    let mut results = json!({"closed_form": closed});
    if oracle {
        let spec = QuadratureSpec::default();
        let numeric = dependence::measure_oracle(&p, &spec)?;
        let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| (a - b).abs());
        results["quadrature"] = to_value(&numeric);
        results["abs_difference"] = json!({
            "rho": (closed.rho - numeric.rho).abs(),
            "gamma": diff(closed.gamma, numeric.gamma),
            "tau": (closed.tau - numeric.tau).abs(),
            "eta": diff(closed.eta, numeric.eta),
            "phi": diff(closed.phi, numeric.phi),
        });
        results["quadrature_spec"] = to_value(&spec);
    }
    Ok(RunReport::new(
        "measures",
        json!({"alpha": args.alpha, "delta": args.delta, "oracle": oracle}),
        results,
    )
    .into())
}

const TAIL_PROBES: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 0.9, 0.99, 0.999, 0.9999];

fn properties(args: &CopulaArgs, grid: usize) -> ecop_core::Result<Outcome> {
    let p = copula_params(args)?;
    let results = json!({
        "quadrant": dependence::check_quadrant_dependence(&p, grid)?,
        "tp2": dependence::check_tp2(&p, grid)?,
        "tail": dependence::tail_dependence_probe(&p, &TAIL_PROBES)?,
    });
    Ok(RunReport::new(
        "properties",
        json!({"alpha": args.alpha, "delta": args.delta, "grid": grid}),
        results,
    )
    .into())
}

fn sample(
    args: &CopulaArgs,
    lambdas: Option<(f64, f64)>,
    n: usize,
    seed: u64,
) -> ecop_core::Result<()> {
    let stdout = std::io::stdout().lock();
    match lambdas {
        Some((l1, l2)) => {
            let p = BrdParams::new(l1, l2, args.alpha, args.delta)?;
            write_pairs_csv(stdout, ("x", "y"), &brd::sample_brd(&p, n, seed))?;
        }
        None => {
            let p = copula_params(args)?;
            let pairs: Vec<_> = copula::sample(&p, n, seed)
                .into_iter()
                .map(|pt| (pt.u, pt.v))
                .collect();
            write_pairs_csv(stdout, ("u", "v"), &pairs)?;
        }
    }
    Ok(())
}

fn ks(args: &InputArgs, column: Column) -> ecop_core::Result<Outcome> {
    let ingested = load(args)?;
    let values = match column {
        Column::X => ingested.data.xs(),
        Column::Y => ingested.data.ys(),
    };
    let lambda = fit_rayleigh_marginal(&values)?;
    let report = ks_test_rayleigh(&values, lambda)?;
    let mut params = input_echo(args);
    params["column"] = json!(match column {
        Column::X => "x",
        Column::Y => "y",
    });
    let results = json!({"ks": report, "rejected_rows": ingested.rejected.len()});
    Ok(RunReport::new("ks", params, results).into())
}

/// Competing models from the published football-goals comparison. These are
/// quoted constants, not fitted here.
fn reference_models() -> Value {
    json!([
        {"model": "BGED", "log_lik": -340.5234, "aic": 687.0468, "bic": 691.8795},
        {"model": "BMOED", "log_lik": -339.006, "aic": 684.012, "bic": 688.8448},
        {"model": "BGRD", "log_lik": -331.879, "aic": 664.589, "bic": 672.6436},
        {
            "model": "BRD",
            "lambda1": 33.39429, "lambda2": 28.08949, "delta": 10.39829, "alpha": 0.2871858,
            "log_lik": -327.256, "aic": 664.512, "bic": 668.9557
        },
    ])
}

fn fit(args: &InputArgs, restarts: usize, seed: u64) -> ecop_core::Result<Outcome> {
    let ingested = load(args)?;
    let result = inference::fit_brd(&ingested.data, restarts, seed)?;
    let mut params = input_echo(args);
    params["restarts"] = json!(restarts);
    let results = json!({
        "fit": result,
        "rejected_rows": ingested.rejected.len(),
        "comparison": {
            "this_fit": {
                "model": "BRD",
                "log_lik": result.log_lik,
                "aic": result.aic,
                "bic": result.bic,
            },
            "published": reference_models(),
        },
    });
    let mut report = RunReport::new("fit", params, results);
    report.seed = Some(seed);
    Ok(report.into())
}

fn run(cli: &Cli) -> ecop_core::Result<Option<Outcome>> {
    let outcome = match &cli.command {
        Command::Validate(a) => validate(a)?,
        Command::Eval { params, u, v } => eval(params, *u, *v)?,
        Command::Table1 { alpha_list } => table1(alpha_list.as_deref())?,
        Command::Measures { params, oracle } => measures(params, *oracle)?,
        Command::Properties { params, grid } => properties(params, *grid)?,
        Command::Sample {
            params,
            lambda1,
            lambda2,
            n,
            seed,
        } => {
            sample(params, lambda1.zip(*lambda2), *n, *seed)?;
            return Ok(None);
        }
        Command::Ks { input, column } => ks(input, *column)?,
        Command::Fit {
            input,
            restarts,
            seed,
        } => fit(input, *restarts, *seed)?,
    };
    Ok(Some(outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(Some(mut outcome)) => {
            if cli.timing {
                outcome.report.wall_time_s = Some(start.elapsed().as_secs_f64());
            }
            let mut out = std::io::stdout().lock();
            if writeln!(out, "{}", emit_report(&outcome.report, cli.pretty)).is_err() {
                return ExitCode::from(EXIT_IO);
            }
            ExitCode::from(outcome.exit)
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
