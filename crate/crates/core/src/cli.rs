//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 unsolvable target,
//! 3 input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::exec::Execution;
use crate::fixtures::{self, Fixture};
use crate::hamiltonian::{parse_hamiltonian, parse_target, HamiltonianSpec};
use crate::linear_system::{system_matrix_csv, DEFAULT_MAX_DENOMINATOR};
use crate::pipeline::{scaling_text, solve, Method, SolveOptions};
use crate::scheme::{parse_scheme, DecouplingScheme, OrderingPolicy};
use crate::simulator::{sweep, to_csv, SweepGrid, SweepModel, DEFAULT_FOCK_DIM};
use crate::verifier::{check_decoupling, AverageReport, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pauli-dd", version, about = "Dynamical decoupling schemes from generalized Pauli operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lp,
    Particular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingArg {
    Lexicographic,
    #[value(alias = "paper")]
    Bundled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a scheme turning a Hamiltonian into a target Hamiltonian.
    Solve {
        hamiltonian: PathBuf,
        target: PathBuf,
        #[arg(long, value_enum, default_value = "lp")]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_MAX_DENOMINATOR)]
        max_denominator: u64,
        #[arg(long, value_enum, default_value = "lexicographic")]
        ordering: OrderingArg,
        /// Scheme file to write; the scheme goes to standard output otherwise.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write the system matrix as CSV.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        /// Print the simplex pivot log.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Check a scheme against a Hamiltonian and target at first order.
    Verify {
        hamiltonian: PathBuf,
        target: PathBuf,
        scheme: PathBuf,
        /// Defaults to 0 on the exact path and 1e-9 otherwise.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate pulsed evolution and print a fidelity table.
    Simulate {
        /// Bundled example (`swap` runs the two-qubit oscillator model).
        #[arg(long, conflicts_with_all = ["hamiltonian", "target"])]
        example: Option<String>,
        #[arg(long, requires = "target")]
        hamiltonian: Option<PathBuf>,
        #[arg(long, requires = "hamiltonian")]
        target: Option<PathBuf>,
        /// Bundled scheme name (`eq14`, `eq17`, ...) or scheme file.
        #[arg(long)]
        scheme: Option<String>,
        /// Comma-separated coupling strengths.
        #[arg(long, default_value = "0.25,0.5,1.0")]
        lambda: String,
        /// Repetitions: `a..b` (inclusive), a single value or a comma list.
        #[arg(long, default_value = "1..10")]
        n: String,
        #[arg(long, default_value_t = DEFAULT_FOCK_DIM)]
        fock: usize,
        /// Run the uncontrolled evolution instead.
        #[arg(long)]
        no_decoupling: bool,
        /// Evaluate grid points on one thread.
        #[arg(long)]
        sequential: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// List the bundled examples or write them to a directory.
    Examples {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INPUT, message: message.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_hamiltonian(path: &Path) -> Result<HamiltonianSpec, Failure> {
    parse_hamiltonian(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_target(path: &Path) -> Result<HamiltonianSpec, Failure> {
    parse_target(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_scheme(path: &Path) -> Result<DecouplingScheme, Failure> {
    parse_scheme(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve { hamiltonian, target, method, max_denominator, ordering, output, dump_matrix, verbose } => {
            let method = match method {
                MethodArg::Lp => Method::Lp,
                MethodArg::Particular => Method::Particular,
            };
            let ordering = match ordering {
                OrderingArg::Lexicographic => OrderingPolicy::Lexicographic,
                OrderingArg::Bundled => OrderingPolicy::Bundled,
            };
            let options = SolveOptions { method, max_denominator, ordering, verbose };
            cmd_solve(&hamiltonian, &target, &options, output.as_deref(), dump_matrix.as_deref(), out)
        }
        Command::Verify { hamiltonian, target, scheme, tolerance, csv } => {
            cmd_verify(&hamiltonian, &target, &scheme, tolerance, csv.as_deref(), out)
        }
        Command::Simulate { example, hamiltonian, target, scheme, lambda, n, fock, no_decoupling, sequential, output } => {
            let source = match (example, hamiltonian, target) {
                (Some(name), _, _) => ModelSource::Example(name),
                (None, Some(h), Some(t)) => ModelSource::Files(h, t),
                _ => ModelSource::Example("swap".to_string()),
            };
            let request = SimulateRequest {
                source,
                scheme,
                lambda,
                n,
                fock,
                no_decoupling,
                execution: if sequential { Execution::Sequential } else { Execution::Parallel },
            };
            cmd_simulate(&request, output.as_deref(), out)
        }
        Command::Examples { output } => cmd_examples(output.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_solve(
    h_path: &Path,
    t_path: &Path,
    options: &SolveOptions,
    output: Option<&Path>,
    dump_matrix: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let h = load_hamiltonian(h_path)?;
    let target = load_target(t_path)?;
    let outcome = solve(&h, &target, options).map_err(|e| Failure {
        code: if e.is_unsolvable() { EXIT_UNSOLVABLE } else { EXIT_INPUT },
        message: e.to_string(),
    })?;
    if let Some(path) = dump_matrix {
        write_file(path, &system_matrix_csv(&outcome.ratio))?;
    }
    let scheme = &outcome.scheme;
    let mut summary = vec![
        format!("D = {}", scaling_text(&scheme.scaling)),
        format!("m = {}", scheme.m()),
        format!("rounding error = {:e}", outcome.rounding_error),
        format!("exact = {}", outcome.exact),
    ];
    if let Some(stats) = &outcome.lp_stats {
        summary.push(format!(
            "lp: {} constraints, {} variables, {} pivots",
            stats.constraints, stats.variables, stats.iterations
        ));
        if options.verbose {
            summary.extend(stats.pivot_log.iter().cloned());
        }
    }
    let io = |e: std::io::Error| Failure::input(e);
    match output {
        Some(path) => {
            write_file(path, &scheme.serialize())?;
            for line in &summary {
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        None => {
            for line in &summary {
                writeln!(out, "# {line}").map_err(io)?;
            }
            write!(out, "{}", scheme.serialize()).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

/// Runs the first-order check with the default tolerance policy when
/// `tolerance` is `None`.
pub fn verify_with_default_tolerance(
    h: &HamiltonianSpec,
    target: &HamiltonianSpec,
    scheme: &DecouplingScheme,
    tolerance: Option<f64>,
) -> Result<AverageReport, crate::verifier::VerifyError> {
    let report = check_decoupling(h, target, scheme, tolerance.unwrap_or(DEFAULT_TOLERANCE))?;
    if tolerance.is_none() && report.exact {
        return check_decoupling(h, target, scheme, 0.0);
    }
    Ok(report)
}

fn cmd_verify(
    h_path: &Path,
    t_path: &Path,
    s_path: &Path,
    tolerance: Option<f64>,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let h = load_hamiltonian(h_path)?;
    let target = load_target(t_path)?;
    let scheme = load_scheme(s_path)?;
    if let Some(t) = tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::input(format!("invalid tolerance {t}")));
        }
    }
    let report = verify_with_default_tolerance(&h, &target, &scheme, tolerance).map_err(Failure::input)?;
    if let Some(path) = csv {
        write_file(path, &report.to_csv())?;
    }
    write!(out, "{}", report.to_table()).map_err(Failure::input)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[derive(Debug, Clone, PartialEq)]
enum ModelSource {
    Example(String),
    Files(PathBuf, PathBuf),
}

struct SimulateRequest {
    source: ModelSource,
    scheme: Option<String>,
    lambda: String,
    n: String,
    fock: usize,
    no_decoupling: bool,
    execution: Execution,
}

/// Parses `a..b` (inclusive), `k` or `k1,k2,...`; zero repetitions are dropped.
pub fn parse_repetitions(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    let values: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {text:?}"))?;
        let b: usize = b.trim().parse().map_err(|_| format!("bad range end in {text:?}"))?;
        if a > b {
            return Err(format!("empty or reversed range {text:?}"));
        }
        (a..=b).collect()
    } else if text.is_empty() {
        Vec::new()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| format!("bad repetition count {s:?}")))
            .collect::<Result<_, _>>()?
    };
    Ok(values.into_iter().filter(|&n| n > 0).collect())
}

/// Parses a comma-separated list of finite coupling strengths.
pub fn parse_lambdas(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("bad coupling strength {s:?}")),
        })
        .collect()
}

fn resolve_scheme(name: &str) -> Result<(DecouplingScheme, String), Failure> {
    if let Some(f) = fixtures::by_name(name) {
        return Ok((f.printed_scheme(), f.scheme_id.to_string()));
    }
    let path = Path::new(name);
    let id = path.file_stem().map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((load_scheme(path)?, id))
}

fn cmd_simulate(req: &SimulateRequest, output: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let lambdas = parse_lambdas(&req.lambda).map_err(Failure::input)?;
    let ns = parse_repetitions(&req.n).map_err(Failure::input)?;
    if req.fock < 2 {
        return Err(Failure::input(format!("oscillator truncation must be at least 2, got {}", req.fock)));
    }
    let (model, default_scheme): (SweepModel, Option<Fixture>) = match &req.source {
        ModelSource::Example(name) => {
            let f = fixtures::by_name(name).ok_or_else(|| Failure::input(format!("unknown example {name:?}")))?;
            let model = if f.name == fixtures::SWAP.name {
                SweepModel::Oscillators { fock_dim: req.fock }
            } else {
                SweepModel::Spec { hamiltonian: f.hamiltonian_spec(), target: f.target_spec() }
            };
            (model, Some(f))
        }
        ModelSource::Files(h, t) => {
            (SweepModel::Spec { hamiltonian: load_hamiltonian(h)?, target: load_target(t)? }, None)
        }
    };
    let chosen = if req.no_decoupling {
        None
    } else if let Some(name) = &req.scheme {
        Some(resolve_scheme(name)?)
    } else if let Some(f) = default_scheme {
        Some((f.printed_scheme(), f.scheme_id.to_string()))
    } else {
        let SweepModel::Spec { hamiltonian, target } = &model else { unreachable!("file models are specs") };
        let outcome = solve(hamiltonian, target, &SolveOptions::default()).map_err(|e| Failure {
            code: if e.is_unsolvable() { EXIT_UNSOLVABLE } else { EXIT_INPUT },
            message: e.to_string(),
        })?;
        Some((outcome.scheme, "lp".to_string()))
    };
    let grid = SweepGrid::new(lambdas, ns, model.system_dim());
    let (scheme, id) = match &chosen {
        Some((s, id)) => (Some(s), id.as_str()),
        None => (None, "none"),
    };
    let rows = sweep(&model, scheme, id, &grid, req.execution).map_err(Failure::input)?;
    let csv = to_csv(&rows);
    match output {
        Some(path) => write_file(path, &csv)?,
        None => write!(out, "{csv}").map_err(Failure::input)?,
    }
    Ok(EXIT_OK)
}

fn cmd_examples(output: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    match output {
        Some(dir) => {
            let written = fixtures::export(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            for path in written {
                writeln!(out, "{}", path.display()).map_err(Failure::input)?;
            }
        }
        None => {
            for f in fixtures::ALL {
                writeln!(out, "{:<10} {:<6} {}", f.name, f.scheme_id, f.description).map_err(Failure::input)?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("pauli-dd").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn repetition_ranges() {
        assert_eq!(parse_repetitions("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_repetitions("0..0").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_repetitions("4").unwrap(), vec![4]);
        assert_eq!(parse_repetitions("2,5").unwrap(), vec![2, 5]);
        assert!(parse_repetitions("3..1").is_err());
        assert!(parse_repetitions("x").is_err());
    }

    #[test]
    fn lambda_lists() {
        assert_eq!(parse_lambdas("0.25, 1").unwrap(), vec![0.25, 1.0]);
        assert!(parse_lambdas("nan").is_err());
    }

    #[test]
    fn unknown_subcommand_is_input_error() {
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INPUT);
    }

    #[test]
    fn help_exits_cleanly() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("solve"));
    }

    #[test]
    fn examples_listing() {
        let (code, out, _) = run_args(&["examples"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 4);
    }

    #[test]
    fn simulate_empty_grid() {
        let (code, out, _) = run_args(&["simulate", "--example", "swap", "--n", "0..0"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "lambda,n,dt,fidelity,scheme_id\n");
    }

    #[test]
    fn simulate_bad_grid() {
        assert_eq!(run_args(&["simulate", "--n", "a..b"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["simulate", "--lambda", "x"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["simulate", "--fock", "1"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["simulate", "--example", "nope"]).0, EXIT_INPUT);
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = run_args(&["verify", "/nonexistent/h", "/nonexistent/t", "/nonexistent/s"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.starts_with("error:"));
    }
}
