//! Command-line front end: parses a spec, runs one library operation and
//! writes a CSV table or JSON document.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use steinprod::dist::{self, DensityEvaluator, MellinTransform};
use steinprod::specfun::{meijer_g, MeijerGParams};
use steinprod::steinops::{adjoint_ode, build_stein, reduce_order, ProductSpec};
use steinprod::steinsolve::{solve_stein_pg, TestFunction};
use steinprod::verify::{run_suite, Suite};
use thiserror::Error;

/// Spec bundled with the binary (`steinprod example-spec`).
pub const EXAMPLE_SPEC: &str = include_str!("../../../docs/example_spec.json");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Ran to completion but at least one check failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) | Self::Io { .. } => 1,
            Self::Numerical(_) | Self::Failed(_) => 2,
        }
    }
}

impl From<steinprod::Error> for CliError {
    fn from(e: steinprod::Error) -> Self {
        if e.is_numerical() {
            Self::Numerical(e.to_string())
        } else {
            Self::Invalid(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// `start:end:count`, evenly spaced and inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid '{s}' is not start:end:count"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("grid '{s}': {e}"));
        let (start, end) = (num(a)?, num(b)?);
        let count: usize = n.trim().parse().map_err(|e| format!("grid '{s}': {e}"))?;
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(format!("grid '{s}': need finite start < end"));
        }
        if count < 2 {
            return Err(format!("grid '{s}': need at least 2 points"));
        }
        Ok(Self { start, end, count })
    }
}

#[derive(Debug, Parser)]
#[command(name = "steinprod", version, about = "Stein operators and Meijer G densities for products of beta, gamma and normal variables")]
pub struct Cli {
    /// Print full error diagnostics.
    #[arg(long, global = true)]
    pub debug: bool,
    /// Worker threads for sampling and Monte Carlo checks.
    #[arg(long, global = true, env = "STEINPROD_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Product spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// start:end:count
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Stein operator as text and JSON.
    Operator {
        #[command(flatten)]
        spec: SpecArg,
        /// Use the order-reduced operator where one exists.
        #[arg(long)]
        reduce: bool,
        /// Print the adjoint equation satisfied by the density instead.
        #[arg(long, conflicts_with = "reduce")]
        adjoint: bool,
    },
    /// Density on a grid: x,density,small_x.
    Density(TableArgs),
    /// Characteristic function on a grid of t: t,phi.
    Cf(TableArgs),
    /// Density against its tail asymptote: x,density,asymptote,ratio,exponent.
    Tail(TableArgs),
    /// Mellin transform two ways: s,factorised,from_density,rel_diff.
    Mellin(TableArgs),
    /// Draw samples, one per line.
    Sample {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the PG(r1, r2, λ) Stein equation: x,f,residual.
    SteinSolve {
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Builtin test function (exp, sin, cos, lorentz, gauss, saturating, identity, one).
        #[arg(long)]
        h: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate G^{m,n}_{p,q}(x | a; b): x,value.
    Gfunc {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        b: Vec<f64>,
        /// Defaults to q.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        #[command(flatten)]
        spec: SpecArg,
        /// stein, adjoint, mellin, ks or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the bundled example spec.
    ExampleSpec,
}

pub fn load_spec(path: &Path) -> Result<ProductSpec> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ProductSpec::from_json_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())
                .and_then(|_| o.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Shortest round-trip form, in exponent notation away from unit scale.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e7).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Rows of numbers as CSV; `{}` formatting is shortest round-trip and never
/// locale dependent.
fn csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::with_capacity(32 * rows.len());
    s.push_str(header);
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| number(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn table(args: &TableArgs, header: &str, row: impl Fn(&DensityEvaluator, &MellinTransform, f64) -> steinprod::Result<Vec<f64>>) -> Result<()> {
    let spec = load_spec(&args.spec.spec)?;
    let dens = DensityEvaluator::new(&spec)?;
    let mellin = MellinTransform::new(&spec)?;
    let rows = args
        .grid
        .points()
        .into_iter()
        .map(|x| row(&dens, &mellin, x))
        .collect::<steinprod::Result<Vec<_>>>()?;
    emit(args.out.as_deref(), &csv(header, &rows))
}

fn bool_col(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Sets the global pool size; a second call in one process is a no-op.
pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Invalid("STEINPROD_THREADS must be at least 1".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Operator { spec, reduce, adjoint } => {
            let spec = load_spec(&spec.spec)?;
            let mut text = String::new();
            let doc = if *adjoint {
                let ode = adjoint_ode(&spec)?;
                let _ = writeln!(text, "adjoint order {}", ode.operator.order());
                let _ = writeln!(text, "{}", ode.operator);
                json!({ "kind": "adjoint", "operator": ode.operator.to_json() })
            } else {
                let b = if *reduce { reduce_order(&spec)? } else { build_stein(&spec)? };
                let _ = writeln!(text, "order {} (unreduced {})", b.reduced_order, b.expected_order);
                if b.is_reduced() {
                    let chain: Vec<String> = b.substitution.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(text, "acts on g = B_[{}] f", chain.join(", "));
                }
                let _ = writeln!(text, "{}", b.operator);
                json!({
                    "kind": if b.is_reduced() { "reduced" } else { "stein" },
                    "expectedOrder": b.expected_order,
                    "substitution": b.substitution.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "operator": b.operator.to_json(),
                })
            };
            text.push_str(&serde_json::to_string_pretty(&doc).expect("json"));
            text.push('\n');
            emit(None, &text)
        }
        Command::Density(t) => table(t, "x,density,small_x", |d, _, x| {
            let p = d.point(x)?;
            Ok(vec![x, p.value, bool_col(p.small_x)])
        }),
        Command::Cf(t) => table(t, "t,phi", |d, _, x| Ok(vec![x, d.char_function(x)?])),
        Command::Tail(t) => table(t, "x,density,asymptote,ratio,exponent", |d, _, x| {
            let (p, a) = (d.pdf(x)?, d.tail_asymptotic(x)?);
            Ok(vec![x, p, a, p / a, d.tail_exponent(x)])
        }),
        Command::Mellin(t) => table(t, "s,factorised,from_density,rel_diff", |_, m, s| {
            let (a, b) = (m.eval(s)?, m.eval_from_density(s)?);
            Ok(vec![s, a, b, ((a - b) / a).abs()])
        }),
        Command::Sample { spec, samples, seed, out } => {
            let spec = load_spec(&spec.spec)?;
            let w = dist::sample(&spec, *samples, *seed)?;
            let mut s = String::with_capacity(24 * w.len());
            for v in w {
                let _ = writeln!(s, "{}", number(v));
            }
            emit(out.as_deref(), &s)
        }
        Command::SteinSolve { r1, r2, lambda, h, grid, out } => {
            let h = TestFunction::builtin(h)?;
            let sol = solve_stein_pg(*r1, *r2, *lambda, &h)?;
            let rows = grid
                .points()
                .into_iter()
                .map(|x| Ok(vec![x, sol.f(x)?, sol.residual(x)?]))
                .collect::<steinprod::Result<Vec<_>>>()?;
            emit(out.as_deref(), &csv("x,f,residual", &rows))
        }
        Command::Gfunc { a, b, m, n, x, tolerance } => {
            if !(*tolerance > 0.0) {
                return Err(CliError::Invalid(format!("tolerance must be positive, got {tolerance}")));
            }
            let params = MeijerGParams::new(m.unwrap_or(b.len()), *n, a.clone(), b.clone())?;
            let rows = x
                .iter()
                .map(|&x| Ok(vec![x, meijer_g(&params, x, *tolerance)?]))
                .collect::<steinprod::Result<Vec<_>>>()?;
            emit(None, &csv("x,value", &rows))
        }
        Command::Verify { spec, suite, samples, seed, out } => {
            let spec = load_spec(&spec.spec)?;
            let suite: Suite = suite.parse()?;
            if *samples < 2 {
                return Err(CliError::Invalid("need at least 2 samples".into()));
            }
            let set = run_suite(&spec, suite, *samples, *seed)?;
            let mut text = serde_json::to_string_pretty(&set).expect("json");
            text.push('\n');
            emit(out.as_deref(), &text)?;
            let failed: Vec<&str> = set.reports.iter().filter(|r| !r.passed).map(|r| r.test_id.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
            }
        }
        Command::ExampleSpec => emit(None, EXAMPLE_SPEC),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "-4:4:101".parse().unwrap();
        let p = g.points();
        assert_eq!((p.len(), p[0], p[100], p[50]), (101, -4.0, 4.0, 0.0));
        assert!("1:1:5".parse::<Grid>().is_err());
        assert!("0:1:1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("a:1:3".parse::<Grid>().is_err());
    }

    #[test]
    fn example_spec_parses() {
        let spec = ProductSpec::from_json_str(EXAMPLE_SPEC).unwrap();
        assert_eq!((spec.m(), spec.n(), spec.normal_count), (1, 1, 1));
    }

    #[test]
    fn number_format() {
        assert_eq!(number(0.25), "0.25");
        assert_eq!(number(6.37e-15), "6.37e-15");
        assert_eq!(number(-2e9), "-2e9");
        assert_eq!(number(f64::INFINITY), "inf");
        for v in [1.0 / 3.0, 1.234e-200, 7.5e300] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn exit_codes() {
        let num: CliError = steinprod::Error::Numerical("x".into()).into();
        let bad: CliError = steinprod::Error::InvalidParameter("x".into()).into();
        assert_eq!((num.exit_code(), bad.exit_code()), (2, 1));
    }
}
