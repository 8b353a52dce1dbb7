mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use picsim_core::benchmark::{benchmark_chains, LINK_LENGTH};
use picsim_core::reference::{mzi_chain, MziOptions};
use picsim_core::simulate::DEFAULT_POINTS;
use picsim_core::{parse_file, run_sweep, Error, Subcircuit, SweepSpec};

use output::Pair;

const EXIT_PARSE: u8 = 1;
const EXIT_SIMULATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

const DEFAULT_START: f64 = 1500e-9;
const DEFAULT_STOP: f64 = 1600e-9;

#[derive(Debug, Parser)]
#[command(name = "picsim", version, about = "Photonic circuit simulation by sub-network growth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep a .phc netlist and write the requested transmissions.
    Simulate(SimulateArgs),
    /// Time circuit reduction on chains of MZIs.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    netlist: PathBuf,
    /// Driven pin; pairs with the --to at the same position.
    #[arg(long = "from")]
    from: Vec<String>,
    /// Observed pin.
    #[arg(long = "to")]
    to: Vec<String>,
    /// Every ordered pair of external pins, reflections included.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    all_pairs: bool,
    /// Start wavelength in metres; overrides the netlist's sweep line.
    #[arg(long)]
    start: Option<f64>,
    /// Stop wavelength in metres.
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 100])]
    mzi_counts: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Also write each benchmarked chain as `mzi_chain_<K>.phc` in this directory.
    #[arg(long)]
    save_netlists: Option<PathBuf>,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Benchmark(args) => benchmark(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn sweep_spec(from_file: Option<SweepSpec>, args: &SimulateArgs) -> Result<SweepSpec, Failure> {
    let base = from_file.map(|s| (s.start, s.stop, s.n_points));
    let (start, stop, points) = base.unwrap_or((DEFAULT_START, DEFAULT_STOP, DEFAULT_POINTS));
    SweepSpec::wavelength(args.start.unwrap_or(start), args.stop.unwrap_or(stop), args.points.unwrap_or(points))
        .map_err(|e| fail(EXIT_USAGE, e.to_string()))
}

fn pairs(circuit: &Subcircuit, args: &SimulateArgs) -> Result<Vec<Pair>, Failure> {
    let pins: Vec<String> = circuit.external_pins().into_iter().map(|e| e.name).collect();
    if args.all_pairs {
        return Ok(pins.iter().flat_map(|f| pins.iter().map(|t| Pair { from: f.clone(), to: t.clone() })).collect());
    }
    let other = |pin: &str| -> Option<String> {
        match pins.as_slice() {
            [only] => Some(only.clone()),
            [a, b] => Some(if a == pin { b.clone() } else { a.clone() }),
            _ => None,
        }
    };
    let list = match (args.from.as_slice(), args.to.as_slice()) {
        ([], []) => match pins.as_slice() {
            [only] => vec![Pair { from: only.clone(), to: only.clone() }],
            [a, b] => vec![Pair { from: a.clone(), to: b.clone() }],
            _ => return Err(fail(EXIT_USAGE, format!("circuit has {} external pins; give --from and --to", pins.len()))),
        },
        ([f], []) => {
            let to = other(f).ok_or_else(|| fail(EXIT_USAGE, "--to is required for circuits with more than two pins"))?;
            vec![Pair { from: f.clone(), to }]
        }
        ([], [t]) => {
            let from = other(t).ok_or_else(|| fail(EXIT_USAGE, "--from is required for circuits with more than two pins"))?;
            vec![Pair { from, to: t.clone() }]
        }
        (f, t) if f.len() == t.len() => {
            f.iter().zip(t).map(|(f, t)| Pair { from: f.clone(), to: t.clone() }).collect()
        }
        (f, t) => return Err(fail(EXIT_USAGE, format!("{} --from but {} --to; they pair up by position", f.len(), t.len()))),
    };
    for p in &list {
        for pin in [&p.from, &p.to] {
            if !pins.contains(pin) {
                return Err(fail(EXIT_USAGE, format!("{pin:?} is not an external pin; available: {}", pins.join(", "))));
            }
        }
    }
    Ok(list)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| fail(EXIT_SIMULATION, e.to_string()))
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let (circuit, sweep) = parse_file(&args.netlist).map_err(|e| {
        let msg = match e {
            Error::Parse { line, message } => format!("{}:{line}: {message}", args.netlist.display()),
            other => format!("{}: {other}", args.netlist.display()),
        };
        fail(EXIT_PARSE, msg)
    })?;
    let spec = sweep_spec(sweep, &args)?;
    let pairs = pairs(&circuit, &args)?;
    let result = run_sweep(&circuit, &spec).map_err(|e| fail(EXIT_SIMULATION, e.to_string()))?;
    let text = match args.format {
        Format::Csv => output::csv(&result, &pairs),
        Format::Json => output::json(&result, &pairs),
    }
    .map_err(|e| fail(EXIT_SIMULATION, e.to_string()))?;
    write_output(args.out.as_deref(), &text)
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    if args.mzi_counts.is_empty() || args.mzi_counts.contains(&0) {
        return Err(fail(EXIT_USAGE, "--mzi-counts must list counts of at least 1"));
    }
    if args.repeats == 0 {
        return Err(fail(EXIT_USAGE, "--repeats must be at least 1"));
    }
    let spec = SweepSpec::wavelength(DEFAULT_START, DEFAULT_STOP, args.points).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let grid = spec.grid().map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    if let Some(dir) = &args.save_netlists {
        std::fs::create_dir_all(dir).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
        for &k in &args.mzi_counts {
            let chain = mzi_chain(k, &MziOptions::default(), LINK_LENGTH).map_err(|e| fail(EXIT_SIMULATION, e.to_string()))?;
            let text = picsim_core::parser::emit_with_sweep(&chain, Some(&spec)).map_err(|e| fail(EXIT_SIMULATION, e.to_string()))?;
            write_output(Some(&dir.join(format!("mzi_chain_{k}.phc"))), &text)?;
        }
    }
    let rows = benchmark_chains(&args.mzi_counts, args.repeats, &grid).map_err(|e| fail(EXIT_SIMULATION, e.to_string()))?;
    let mut table = format!("{:>6}  {:>14}  {:>8}\n", "mzis", "mean_seconds", "ratio");
    for r in rows {
        table.push_str(&format!("{:>6}  {:>14.6e}  {:>8.3}\n", r.mzis, r.mean_seconds, r.ratio));
    }
    write_output(None, &table)
}
