//! `piecekit` command line: fit piecewise representations, evaluate
//! them, and apply quadrature-free transforms.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on computation
//! failures (fit did not converge, singular points, missing primitives,
//! malformed function files), 4 on I/O failures.

mod sampled;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use piecekit::fit::{piecewisefit, Anchor, Candidate, FitConfig, FitError};
use piecekit::piece::{Parity, PiecewiseFunction};
use piecekit::{hilbert, json, kernel, quad};
use sampled::SampledTarget;

#[derive(Parser)]
#[command(name = "piecekit", version, about = "Piecewise function toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a target function and write the result as JSON.
    Fit(FitArgs),
    /// Evaluate a stored function on a grid or at explicit points.
    Eval(EvalArgs),
    /// Moments computed from the closed-form primitives.
    Moment(MomentArgs),
    /// Hilbert transform at a complex point or along the real axis.
    Hilbert(HilbertArgs),
    /// Pretty-print the constructor of a stored function.
    Show(ShowArgs),
    /// Cross-check moments or the Hilbert transform with the quadrature
    /// oracle (slow path).
    Quad(QuadArgs),
}

#[derive(Args)]
struct FitArgs {
    /// `builtin:square-lattice-dos` or `csv:PATH`
    #[arg(long)]
    target: String,
    /// Fit interval `A,B`
    #[arg(long, allow_hyphen_values = true)]
    interval: String,
    /// Comma-separated candidates, e.g. `POLY`, `POLY,LOG@left`,
    /// `PLS@right:1.5`, `TAIL@1.0:0.5`
    #[arg(long, default_value = "POLY")]
    formulas: String,
    /// `none`, `even` or `odd`
    #[arg(long, default_value = "none")]
    parity: String,
    /// Relative tolerance of the fit
    #[arg(long)]
    rtol: f64,
    /// Absolute tolerance of the fit
    #[arg(long, default_value_t = 0.0)]
    atol: f64,
    /// JSON function to subtract before fitting and add back afterwards
    #[arg(long)]
    subtract: Option<PathBuf>,
    /// RNG seed (env PIECEKIT_SEED overrides)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Input JSON function
    #[arg(long = "in")]
    input: PathBuf,
    /// Evaluation grid `A,B,N`
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Explicit evaluation points (repeatable)
    #[arg(long = "at", allow_hyphen_values = true)]
    at: Vec<f64>,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Highest moment order; prints `n,value` for n = 0..=N
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct HilbertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Complex argument `RE,IM`
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Evaluate on the real axis (limit from the upper half plane)
    #[arg(long, default_value_t = false)]
    real_axis: bool,
    /// Grid `A,B,N` for --real-axis
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Explicit points for --real-axis (repeatable)
    #[arg(long = "at", allow_hyphen_values = true)]
    at: Vec<f64>,
}

#[derive(Args)]
struct ShowArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Moment order to cross-check
    #[arg(long)]
    n: Option<u32>,
    /// Complex Hilbert argument `RE,IM` to cross-check (needs Im != 0)
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Relative tolerance of the quadrature
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
}

enum CliError {
    Usage(String),
    Compute(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Compute(m) | CliError::Io(m) => m,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Moment(args) => cmd_moment(args),
        Command::Hilbert(args) => cmd_hilbert(args),
        Command::Show(args) => cmd_show(args),
        Command::Quad(args) => cmd_quad(args),
    };
    match result {
        Ok(output) => print!("{output}"),
        Err(err) => {
            eprintln!("error: {}", err.message());
            std::process::exit(err.exit_code());
        }
    }
}

// ---------------------------------------------------------------------
// argument parsing helpers
// ---------------------------------------------------------------------

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("{what} must be `A,B`, got `{text}`")));
    }
    let a = parts[0].trim().parse::<f64>();
    let b = parts[1].trim().parse::<f64>();
    match (a, b) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => Err(CliError::Usage(format!("{what} must be numeric, got `{text}`"))),
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--grid must be `A,B,N`, got `{text}`")));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid start `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid end `{}`", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid count `{}`", parts[2])))?;
    if n < 2 {
        return Err(CliError::Usage("grid needs at least 2 points".to_string()));
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

fn parse_anchor(text: &str) -> Result<Anchor, CliError> {
    match text {
        "left" => Ok(Anchor::LeftEndpoint),
        "right" => Ok(Anchor::RightEndpoint),
        other => other
            .parse::<f64>()
            .map(Anchor::Fixed)
            .map_err(|_| CliError::Usage(format!("anchor must be `left`, `right` or a number, got `{other}`"))),
    }
}

fn parse_candidates(list: &str) -> Result<Vec<Candidate>, CliError> {
    let mut candidates = Vec::new();
    for spec in list.split(',') {
        let spec = spec.trim();
        if spec.is_empty() {
            continue;
        }
        let (name, rest) = match spec.split_once('@') {
            Some((name, rest)) => (name, Some(rest)),
            None => (spec, None),
        };
        let anchored = |rest: Option<&str>| -> Result<Anchor, CliError> {
            parse_anchor(rest.ok_or_else(|| {
                CliError::Usage(format!("{name} needs an anchor: `{name}@left`, `{name}@right` or `{name}@X0`"))
            })?)
        };
        let candidate = match name {
            "POLY" => Candidate::Poly,
            "LOG" => Candidate::Log { anchor: anchored(rest)? },
            "XLOG" => Candidate::XLog { anchor: anchored(rest)? },
            "ISRS" => Candidate::Isrs { anchor: anchored(rest)? },
            "SQRT" => Candidate::Sqrt { anchor: anchored(rest)? },
            "PLS" => {
                let rest = rest.ok_or_else(|| {
                    CliError::Usage("PLS needs `PLS@ANCHOR:EXPONENT`".to_string())
                })?;
                let (anchor_text, expo_text) = rest.split_once(':').ok_or_else(|| {
                    CliError::Usage("PLS needs `PLS@ANCHOR:EXPONENT`".to_string())
                })?;
                let exponent: f64 = expo_text.trim().parse().map_err(|_| {
                    CliError::Usage(format!("bad PLS exponent `{expo_text}`"))
                })?;
                Candidate::Pls {
                    anchor: parse_anchor(anchor_text)?,
                    exponent,
                }
            }
            "TAIL" => {
                let rest = rest
                    .ok_or_else(|| CliError::Usage("TAIL needs `TAIL@P:Q`".to_string()))?;
                let (p_text, q_text) = rest
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage("TAIL needs `TAIL@P:Q`".to_string()))?;
                let p: f64 = p_text
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad TAIL p `{p_text}`")))?;
                let q: f64 = q_text
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad TAIL q `{q_text}`")))?;
                Candidate::Tail { p, q }
            }
            other => {
                return Err(CliError::Usage(format!("unknown formula `{other}`")));
            }
        };
        candidates.push(candidate);
    }
    if candidates.is_empty() {
        return Err(CliError::Usage("empty --formulas list".to_string()));
    }
    Ok(candidates)
}

fn load_function(path: &PathBuf) -> Result<PiecewiseFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    json::from_json(&text).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))
}

/// Shortest round-trip decimal for CSV cells.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> Result<String, CliError> {
    let interval = parse_pair(&args.interval, "--interval")?;
    let candidates = parse_candidates(&args.formulas)?;
    let parity = Parity::from_name(&args.parity)
        .ok_or_else(|| CliError::Usage(format!("parity must be none|even|odd, got `{}`", args.parity)))?;
    let seed = match std::env::var("PIECEKIT_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("PIECEKIT_SEED must be a u64, got `{text}`")))?,
        Err(_) => args.seed,
    };

    let subtract = match &args.subtract {
        Some(path) => Some(load_function(path)?),
        None => None,
    };

    let target: Box<dyn Fn(f64) -> f64> = match args.target.as_str() {
        "builtin:square-lattice-dos" => Box::new(piecekit::demo::square_lattice_dos),
        other => match other.strip_prefix("csv:") {
            Some(path) => {
                let samples = SampledTarget::from_csv(std::path::Path::new(path))
                    .map_err(|e| match e {
                        sampled::SampleError::Io(io) => {
                            CliError::Io(format!("cannot read {path}: {io}"))
                        }
                        other => CliError::Compute(format!("{path}: {other}")),
                    })?;
                let (lo, hi) = samples.range();
                if interval.0 < lo || interval.1 > hi {
                    return Err(CliError::Usage(format!(
                        "--interval {},{} exceeds the sampled range [{lo}, {hi}]",
                        interval.0, interval.1
                    )));
                }
                Box::new(move |x| samples.eval(x))
            }
            None => {
                return Err(CliError::Usage(format!(
                    "--target must be `builtin:square-lattice-dos` or `csv:PATH`, got `{other}`"
                )))
            }
        },
    };

    let mut config = FitConfig::new(args.rtol);
    config.atol = args.atol;
    config.candidates = candidates;
    config.parity = parity;
    config.rng_seed = seed;

    let effective_target: Box<dyn Fn(f64) -> f64> = match &subtract {
        Some(s) => {
            let s = s.clone();
            let target = target;
            Box::new(move |x| target(x) - s.evaluate(x))
        }
        None => target,
    };

    let (fitted, report) = match piecewisefit(&*effective_target, interval, &config) {
        Ok(ok) => ok,
        Err(FitError::DidNotConverge {
            interval,
            error,
            tolerance,
        }) => {
            // failure report still goes to stdout before exiting
            println!(
                "fit did not converge: worst interval [{}, {}], error {:e}, tolerance {:e}",
                interval.0, interval.1, error, tolerance
            );
            return Err(CliError::Compute("fit did not converge".to_string()));
        }
        Err(e) => return Err(CliError::Compute(e.to_string())),
    };
    let result = match &subtract {
        Some(s) => fitted
            .add(s)
            .map_err(|e| CliError::Compute(e.to_string()))?,
        None => fitted,
    };

    std::fs::write(&args.out, json::to_json(&result))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", args.out.display())))?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "fit: {} piece(s), max error {:e}, {} target evaluations",
        report.pieces_produced, report.max_observed_error, report.evaluations_of_target
    );
    for piece in &report.pieces {
        let names: Vec<String> = piece.formulas.iter().map(|f| f.to_string()).collect();
        let degree = match piece.poly_degree {
            Some(d) => format!(" (POLY degree {d})"),
            None => String::new(),
        };
        let _ = writeln!(
            summary,
            "  [{}, {}] {}{}: error {:e} <= {:e}",
            piece.interval.0,
            piece.interval.1,
            names.join("+"),
            degree,
            piece.max_error,
            piece.tolerance
        );
    }
    let _ = writeln!(summary, "wrote {}", args.out.display());
    Ok(summary)
}

fn eval_points(grid: &Option<String>, at: &[f64]) -> Result<Vec<f64>, CliError> {
    match (grid, at.is_empty()) {
        (Some(grid), true) => parse_grid(grid),
        (None, false) => Ok(at.to_vec()),
        _ => Err(CliError::Usage(
            "provide exactly one of --grid A,B,N or --at values".to_string(),
        )),
    }
}

fn cmd_eval(args: EvalArgs) -> Result<String, CliError> {
    let f = load_function(&args.input)?;
    let points = eval_points(&args.grid, &args.at)?;
    let mut out = String::new();
    for x in points {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(f.evaluate(x)));
    }
    Ok(out)
}

fn cmd_moment(args: MomentArgs) -> Result<String, CliError> {
    let f = load_function(&args.input)?;
    let values = kernel::moments(&f, args.n).map_err(|e| CliError::Compute(e.to_string()))?;
    let mut out = String::new();
    for (n, value) in values.iter().enumerate() {
        let _ = writeln!(out, "{n},{}", fmt_f64(*value));
    }
    Ok(out)
}

fn cmd_hilbert(args: HilbertArgs) -> Result<String, CliError> {
    let f = load_function(&args.input)?;
    let mut out = String::new();
    match (&args.z, args.real_axis) {
        (Some(z_text), false) => {
            let (re, im) = parse_pair(z_text, "--z")?;
            let h = hilbert::hilbert(&f, Complex64::new(re, im))
                .map_err(|e| CliError::Compute(e.to_string()))?;
            let _ = writeln!(out, "{},{}", fmt_f64(h.re), fmt_f64(h.im));
        }
        (None, true) => {
            let points = eval_points(&args.grid, &args.at)?;
            for y in points {
                let h = hilbert::hilbert(&f, Complex64::new(y, 0.0))
                    .map_err(|e| CliError::Compute(format!("at y = {y}: {e}")))?;
                let _ = writeln!(out, "{},{},{}", fmt_f64(y), fmt_f64(h.re), fmt_f64(h.im));
            }
        }
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --z RE,IM or --real-axis".to_string(),
            ))
        }
    }
    Ok(out)
}

fn cmd_show(args: ShowArgs) -> Result<String, CliError> {
    let f = load_function(&args.input)?;
    Ok(format!("{f}\n"))
}

fn cmd_quad(args: QuadArgs) -> Result<String, CliError> {
    let f = load_function(&args.input)?;
    let mut out = String::new();
    match (args.n, &args.z) {
        (Some(n), None) => {
            let r = quad::piecewise_moment(&f, n, args.rtol, 1e-300)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            let _ = writeln!(out, "{}", fmt_f64(r.value));
        }
        (None, Some(z_text)) => {
            let (re, im) = parse_pair(z_text, "--z")?;
            if im == 0.0 {
                return Err(CliError::Usage(
                    "quadrature Hilbert cross-check needs Im z != 0".to_string(),
                ));
            }
            let r = quad::piecewise_hilbert(&f, Complex64::new(re, im), args.rtol, 1e-300)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            let _ = writeln!(out, "{},{}", fmt_f64(r.value.re), fmt_f64(r.value.im));
        }
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --n N or --z RE,IM".to_string(),
            ))
        }
    }
    Ok(out)
}
