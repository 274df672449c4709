use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qca_core::compiler::{self, CompileOptions, LogicalGate, Slicing};
use qca_core::cvapprox::{self, ErrorMetric, PeriodicFunctionSpec};
use qca_core::pulses::{self, schedule_kappa};
use qca_core::simulator::{self, protocol, DenseState, Layout};
use qca_core::Error;

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "qca", version, about = "Global-pulse compiler and simulator for mirror-encoded qudit chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Shape {
    /// Local dimension.
    #[arg(long = "d")]
    d: Option<u32>,
    /// Chain length.
    #[arg(long = "N")]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a logical circuit file to a global pulse program.
    Compile {
        circuit: PathBuf,
        #[arg(long = "d")]
        d: u32,
        #[arg(long = "N")]
        n: usize,
        /// Operator tolerance for product-formula synthesis.
        #[arg(long, default_value_t = compiler::DEFAULT_TOL)]
        tol: f64,
        /// Fixed product-formula slice count (overrides --tol).
        #[arg(long)]
        slices: Option<usize>,
        /// Directory for program.txt; the program goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a program on random encoded states and compare with the recorded circuit.
    Verify {
        program: PathBuf,
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed fidelity deficit.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a pulse schedule producing a peak at site class l.
    Solve {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "d")]
        d: u32,
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long, allow_hyphen_values = true)]
        v: i64,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fourier-series error table for exp(i alpha f(q)).
    Cv {
        /// Monomial power k of f(q) = q^k.
        #[arg(long, default_value_t = 3, conflicts_with = "table")]
        k: u32,
        /// Tabulated samples of f on a uniform grid over [-L, L], one per line.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        half_width: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value = "10,100,1000", value_delimiter = ',')]
        n_max: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        /// Fail unless the sup error of the last row is below this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Swap site l into the ancilla chain and sample it.
    Readout {
        state: PathBuf,
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::MemoryCap { .. } => EXIT_CAP,
            Error::Gate { source, .. } if matches!(**source, Error::MemoryCap { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_artifact(dir: &Path, name: &str, body: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    fs::write(&p, body).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    Ok(p)
}

/// Report text plus whether every check passed.
type Report = (String, bool);

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("-".into(), |x| x.to_string())
}

fn dir_name(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or("-".into(), |x| x.display().to_string())
}

fn cmd_compile(
    circuit: &Path,
    d: u32,
    n: usize,
    tol: f64,
    slices: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let mut r = format!(
        "# qca compile circuit={} d={d} N={n} tol={tol:e} slices={} out={}\n",
        circuit.display(),
        slices.map_or("auto".into(), |s| s.to_string()),
        dir_name(out)
    );
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    if slices == Some(0) {
        return Err(usage("--slices must be at least 1"));
    }
    let text = read(circuit)?;
    let gates = compiler::parse_circuit(&text, d, circuit.parent())?;
    let slicing = slices.map_or(Slicing::Tolerance(tol), Slicing::Fixed);
    let program = compiler::compile_circuit(&gates, n, d, &CompileOptions { slicing })?;
    for (p, g) in program.provenance.iter().zip(&gates) {
        let _ = writeln!(r, "gate {} cost {}: {}", p.gate_index, p.ops.len(), p.gate);
        if let LogicalGate::BasisRotation { l, label, .. } = g {
            if label.is_identity() {
                continue;
            }
            let formula = pulses::op_count(n, *l)?;
            match compiler::core_cost(n, d, label.a as i64, label.b as i64, *l) {
                Ok(core) => {
                    let _ = writeln!(
                        r,
                        "  op-count l={l}: single-run core {core}, formula 4(N+2)+[N/2]-2m = {formula}{}",
                        if core == formula { "" } else { " (differs)" }
                    );
                }
                Err(e) => {
                    let _ = writeln!(r, "  op-count l={l}: no single-run core ({e}), formula {formula}");
                }
            }
        }
    }
    let _ = writeln!(r, "total cost {}", program.cost());
    let body = program.to_text();
    match out {
        Some(dir) => {
            let p = write_artifact(dir, "program.txt", &body)?;
            let _ = writeln!(r, "program written to {}", p.display());
        }
        None => r.push_str(&body),
    }
    Ok((r, true))
}

fn cmd_verify(
    path: &Path,
    shape: &Shape,
    trials: usize,
    seed: u64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let mut r = format!(
        "# qca verify program={} d={} N={} trials={trials} seed={seed} tol={tol:e} out={}\n",
        path.display(),
        opt(&shape.d),
        opt(&shape.n),
        dir_name(out)
    );
    let fallback = shape.d.zip(shape.n);
    let program = compiler::parse_program(&read(path)?, fallback)?;
    if shape.d.is_some_and(|d| d != program.d) || shape.n.is_some_and(|n| n != program.n) {
        return Err(usage(format!(
            "program is for d={} N={}, flags say d={} N={}",
            program.d,
            program.n,
            opt(&shape.d),
            opt(&shape.n)
        )));
    }
    let circuit = program.recorded_circuit()?;
    let report = compiler::verify_program(&program, &circuit, trials, seed)?;
    let pass = report.min() >= 1.0 - tol;
    let _ = writeln!(r, "d={} N={} gates={} cost={}", program.d, program.n, circuit.len(), program.cost());
    let _ = writeln!(r, "# trial fidelity mirror_fidelity");
    for (i, (f, m)) in report.fidelities.iter().zip(&report.mirror_fidelities).enumerate() {
        let _ = writeln!(r, "{i} {f:.15} {m:.15}");
    }
    let _ = writeln!(r, "min fidelity {:.15}", report.min());
    let _ = writeln!(r, "mean fidelity {:.15}", report.mean());
    let _ = writeln!(r, "min mirror fidelity {:.15}", report.min_mirror());
    let _ = writeln!(r, "{}", if pass { "PASS" } else { "FAIL" });
    if let Some(dir) = out {
        write_artifact(dir, "verify_report.txt", &r)?;
    }
    Ok((r, pass))
}

fn cmd_solve(n: usize, d: u32, u: i64, v: i64, l: usize, out: &Option<PathBuf>) -> Result<Report, Failure> {
    let mut r = format!("# qca solve N={n} d={d} u={u} v={v} l={l} out={}\n", dir_name(out));
    let sol = pulses::solve_peak(n, d, u, v, l)?;
    match schedule_kappa(&sol) {
        Ok(kappa) => {
            let prof = sol.schedule.profile(sol.u, sol.v)?;
            let _ = writeln!(r, "kappa {kappa}");
            let _ = writeln!(r, "pulses {}", sol.schedule.len());
            let _ = writeln!(r, "profile {:?}", prof.values);
            let text = sol.schedule.to_string();
            match out {
                Some(dir) => {
                    let p = write_artifact(dir, "schedule.txt", &text)?;
                    let _ = writeln!(r, "schedule written to {}", p.display());
                }
                None => r.push_str(&text),
            }
            Ok((r, true))
        }
        Err(e) => {
            let _ = writeln!(r, "{e}");
            if let Some(w) = &sol.witness {
                let _ = writeln!(r, "witness {w:?}");
            }
            let _ = writeln!(r, "FAIL");
            Ok((r, false))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_cv(
    k: u32,
    table: &Option<PathBuf>,
    half_width: f64,
    alpha: f64,
    n_max: &[usize],
    grid: usize,
    tol: Option<f64>,
    out: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let source = table.as_ref().map_or(format!("q^{k}"), |p| p.display().to_string());
    let mut r = format!(
        "# qca cv f={source} L={half_width} alpha={alpha} n_max={} grid={grid} tol={} out={}\n",
        n_max.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        opt(&tol),
        dir_name(out)
    );
    if n_max.is_empty() {
        return Err(usage("--n-max needs at least one value"));
    }
    let spec = match table {
        Some(p) => {
            let values = read(p)?
                .lines()
                .enumerate()
                .filter(|(_, s)| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                .map(|(i, s)| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| usage(format!("{}:{}: bad sample `{}`", p.display(), i + 1, s.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            PeriodicFunctionSpec::tabulated(values, half_width)?
        }
        None => PeriodicFunctionSpec::monomial(k).with_half_width(half_width)?,
    };
    let metrics = [ErrorMetric::Sup, ErrorMetric::L2, ErrorMetric::PhaseWindow];
    let cols = metrics
        .iter()
        .map(|&m| cvapprox::error_sweep(&spec, alpha, n_max, grid, m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut body = String::from("# n_max sup l2 window\n");
    for (i, n) in n_max.iter().enumerate() {
        let _ = writeln!(body, "{n} {:e} {:e} {:e}", cols[0][i].1, cols[1][i].1, cols[2][i].1);
    }
    r.push_str(&body);
    let last = cols[0].last().map_or(0.0, |x| x.1);
    let pass = tol.is_none_or(|t| last < t);
    if let Some(t) = tol {
        let _ = writeln!(r, "final sup error {last:e} {} {t:e}: {}", if pass { "<" } else { ">=" }, if pass { "PASS" } else { "FAIL" });
    }
    if let Some(dir) = out {
        let p = write_artifact(dir, "cv_error.txt", &body)?;
        let largest = *n_max.iter().max().unwrap_or(&1);
        let coeffs = cvapprox::fourier_coeffs(&spec, largest)?;
        let q = write_artifact(dir, "cv_coefficients.txt", &coeffs.table())?;
        let _ = writeln!(r, "tables written to {} and {}", p.display(), q.display());
    }
    Ok((r, pass))
}

fn load_state(path: &Path, shape: &Shape) -> Result<DenseState, Failure> {
    let bytes = fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(b"QCAS") {
        return Ok(simulator::read_snapshot(&mut bytes.as_slice())?);
    }
    let text = String::from_utf8(bytes).map_err(|_| usage(format!("{}: not a snapshot", path.display())))?;
    let fallback = shape.d.zip(shape.n).map(|(d, n)| (d, n, Layout::Single));
    Ok(simulator::read_text_snapshot(&text, fallback)?)
}

fn cmd_readout(
    path: &Path,
    shape: &Shape,
    l: usize,
    shots: u64,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let mut r = format!(
        "# qca readout state={} d={} N={} l={l} shots={shots} seed={seed} out={}\n",
        path.display(),
        opt(&shape.d),
        opt(&shape.n),
        dir_name(out)
    );
    let state = load_state(path, shape)?;
    if shape.d.is_some_and(|d| d != state.d()) || shape.n.is_some_and(|n| n != state.n()) {
        return Err(usage(format!(
            "snapshot is d={} N={}, flags say d={} N={}",
            state.d(),
            state.n(),
            opt(&shape.d),
            opt(&shape.n)
        )));
    }
    let state = match state.layout() {
        Layout::Single => state.with_ancilla_chain()?,
        Layout::DataPlusAncilla => state,
    };
    let (after, exact) = protocol::readout_swap(&state, l)?;
    let hist = simulator::measure(&after, &[state.n() + l - 1], shots, seed)?;
    let mut body = String::from("# outcome probability count frequency\n");
    for (k, p) in exact.iter().enumerate() {
        let _ = writeln!(body, "{k} {p:.12} {} {:.6}", hist.counts[k], hist.frequency(k));
    }
    r.push_str(&body);
    if let Some(dir) = out {
        let p = write_artifact(dir, "histogram.txt", &body)?;
        let _ = writeln!(r, "histogram written to {}", p.display());
    }
    Ok((r, true))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Compile { circuit, d, n, tol, slices, out } => cmd_compile(circuit, *d, *n, *tol, *slices, out),
        Command::Verify { program, shape, trials, seed, tol, out } => {
            cmd_verify(program, shape, *trials, *seed, *tol, out)
        }
        Command::Solve { n, d, u, v, l, out } => cmd_solve(*n, *d, *u, *v, *l, out),
        Command::Cv { k, table, half_width, alpha, n_max, grid, tol, out } => {
            cmd_cv(*k, table, *half_width, *alpha, n_max, *grid, *tol, out)
        }
        Command::Readout { state, shape, l, shots, seed, out } => cmd_readout(state, shape, *l, *shots, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok((report, pass)) => {
            print!("{report}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
