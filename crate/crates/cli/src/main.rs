//! `cheshire`: run bundled or custom weak-measurement scenarios, sweeps, and
//! the acceptance suite.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cheshire_core::dynamics::KickSign;
use cheshire_core::hilbert::labels;
use cheshire_core::optics::{self, StateName, StateParams};
use cheshire_core::scenario::{self, parse_scenario, run_scenario, ResultRecord, ScenarioDoc, ScenarioError};
use cheshire_core::verify::{self, Verdict, VerifyOptions};
use cheshire_core::{Ket, SpaceSignature};

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_COMPUTE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(
    name = "cheshire",
    version,
    about = "Weak values and quantum Cheshire cat simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List bundled scenarios, named states and acceptance checks.
    List,
    /// Run a scenario file or `bundle:NAME`.
    Run(RunArgs),
    /// Run a scenario with extra or replaced sweep axes.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `PATH=START:STOP:STEPS`, angles in units of pi. Repeatable.
        #[arg(long = "axis", value_name = "PATH=START:STOP:STEPS", required = true)]
        axes: Vec<String>,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        /// Run a single check, by key or number.
        #[arg(long)]
        only: Option<String>,
        /// Use the published kick sign exp(-i g A q).
        #[arg(long)]
        published_sign: bool,
    },
    /// Print a named state in the labeled product basis.
    ShowState {
        state: String,
        /// In units of pi.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// In units of pi.
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file path, or `bundle:NAME`.
    scenario: String,
    /// Override a field: `theta=0.5`, `coupling.g=1e-4`, ... Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Records,
}

enum Failure {
    Usage(String),
    Parse(String),
    Compute(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Compute(_) => EXIT_COMPUTE,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Compute(m) | Failure::Verify(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::UnknownBundle { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

fn io_failure(what: &str, e: io::Error) -> Failure {
    Failure::Usage(format!("{what}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => list(),
        Command::Run(args) => run(&args, &[]),
        Command::Sweep { run: args, axes } => run(&args, &axes),
        Command::Verify { only, published_sign } => verify(only.as_deref(), published_sign),
        Command::ShowState { state, theta, alpha } => show_state(&state, theta, alpha),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn list() -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        writeln!(out, "bundles:")?;
        for name in scenario::bundle_names() {
            writeln!(out, "  bundle:{name}")?;
        }
        writeln!(out, "states:")?;
        for s in StateName::ALL {
            match s.required_param() {
                Some(p) => writeln!(out, "  {s} ({p})")?,
                None => writeln!(out, "  {s}")?,
            }
        }
        writeln!(out, "checks:")?;
        for c in &verify::CHECKS {
            writeln!(out, "  {} {}: {}", c.number, c.key, c.title)?;
        }
        Ok(())
    };
    emit().map_err(|e| io_failure("stdout", e))
}

fn load(source: &str) -> Result<ScenarioDoc, Failure> {
    let text = match source.strip_prefix("bundle:") {
        Some(name) => scenario::bundle(name)?.to_string(),
        None => std::fs::read_to_string(source).map_err(|e| io_failure(source, e))?,
    };
    parse_scenario(&text).map_err(|e| Failure::Parse(format!("{source}: {e}")))
}

fn split_pair<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str), Failure> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Failure::Usage(format!("{what} `{text}` is not of the form KEY=VALUE")))
}

fn parse_axis(text: &str) -> Result<(&str, f64, f64, usize), Failure> {
    let (path, range) = split_pair(text, "axis")?;
    let bad = || Failure::Usage(format!("axis `{text}` is not of the form PATH=START:STOP:STEPS"));
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(bad());
    };
    Ok((
        path,
        start.parse().map_err(|_| bad())?,
        stop.parse().map_err(|_| bad())?,
        steps.parse().map_err(|_| bad())?,
    ))
}

fn run(args: &RunArgs, axes: &[String]) -> Result<(), Failure> {
    let overrides = args
        .overrides
        .iter()
        .map(|o| split_pair(o, "override"))
        .collect::<Result<Vec<_>, _>>()?;
    let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>, _>>()?;

    let mut doc = load(&args.scenario)?;
    for (path, value) in overrides {
        doc.set(path, value)?;
    }
    for (path, start, stop, steps) in axes {
        doc.set_sweep(path, start, stop, steps)?;
    }
    let records = run_scenario(&doc)?;
    write_output(args, &records)?;

    let failed: Vec<&str> = records.iter().filter_map(|r| r.error.as_deref()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Compute(format!(
            "{} of {} point(s) failed; first: {}",
            failed.len(),
            records.len(),
            failed[0]
        )))
    }
}

fn write_output(args: &RunArgs, records: &[ResultRecord]) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| io_failure(&path.display().to_string(), e))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(io::stdout().lock()),
    };
    let written = match args.format {
        Format::Csv => scenario::write_csv(sink, records),
        Format::Records => scenario::write_records(sink, records),
    };
    written.map_err(|e| io_failure("output", e))
}

fn verify(only: Option<&str>, published_sign: bool) -> Result<(), Failure> {
    let opts = VerifyOptions {
        sign: if published_sign {
            KickSign::Published
        } else {
            KickSign::Standard
        },
    };
    let reports = match only {
        Some(sel) => {
            let check = verify::find_check(sel).ok_or_else(|| {
                let keys: Vec<&str> = verify::check_keys().collect();
                Failure::Usage(format!("unknown check `{sel}` (available: {})", keys.join(", ")))
            })?;
            vec![check.run(&opts)]
        }
        None => verify::run_all(&opts),
    };
    let mut out = io::stdout().lock();
    for r in &reports {
        writeln!(out, "{}", r.summary_line()).map_err(|e| io_failure("stdout", e))?;
        for line in &r.details {
            writeln!(out, "    {line}").map_err(|e| io_failure("stdout", e))?;
        }
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .map(|r| r.key.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Display basis of each factor: `(symbol, ket)` pairs.
fn display_basis(label: &str) -> Option<Vec<(&'static str, Ket)>> {
    match label {
        labels::PATH => Some(vec![("L", optics::left()), ("R", optics::right())]),
        labels::ORBITAL => Some(vec![("a", optics::v_a()), ("b", optics::v_b())]),
        labels::POLARIZATION => Some(vec![("H", optics::horizontal()), ("V", optics::vertical())]),
        _ => None,
    }
}

fn show_state(id: &str, theta: Option<f64>, alpha: Option<f64>) -> Result<(), Failure> {
    let name: StateName = id.parse().map_err(|_| {
        let ids: Vec<&str> = StateName::ALL.iter().map(|s| s.as_str()).collect();
        Failure::Usage(format!("unknown state `{id}` (available: {})", ids.join(", ")))
    })?;
    let params = StateParams {
        theta: theta.map(|x| x * std::f64::consts::PI),
        alpha: alpha.map(|x| x * std::f64::consts::PI),
    };
    let ket = optics::prepare_state(name, &params).map_err(|e| Failure::Usage(e.to_string()))?;
    let sig: &SpaceSignature = ket.signature();

    let mut basis: Vec<(String, Option<Ket>)> = vec![(String::new(), None)];
    let mut annotation = Vec::new();
    for label in sig.labels() {
        let factor = display_basis(label).ok_or_else(|| Failure::Usage(format!("no display basis for `{label}`")))?;
        let symbols: Vec<&str> = factor.iter().map(|(s, _)| *s).collect();
        annotation.push(format!("{label} ({})", symbols.join(", ")));
        let mut next = Vec::with_capacity(basis.len() * factor.len());
        for (prefix, b) in &basis {
            for (sym, k) in &factor {
                let (joined, ket) = match b {
                    None => (sym.to_string(), k.clone()),
                    Some(b) => (
                        format!("{prefix},{sym}"),
                        b.tensor(k).map_err(|e| Failure::Compute(e.to_string()))?,
                    ),
                };
                next.push((joined, Some(ket)));
            }
        }
        basis = next;
    }

    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        let mut header = name.as_str().to_string();
        if let Some(t) = theta {
            header.push_str(&format!(" theta = {t} pi"));
        }
        if let Some(a) = alpha {
            header.push_str(&format!(" alpha = {a} pi"));
        }
        writeln!(out, "{header}")?;
        writeln!(out, "factors: {}", annotation.join(" x "))?;
        for (label, b) in &basis {
            let b = b.as_ref().expect("every state has at least one factor");
            let amp = b.inner(&ket).expect("basis ket shares the state's signature");
            writeln!(out, "|{label}>  {:+.16e} {:+.16e}i", clean(amp.re), clean(amp.im))?;
        }
        Ok(())
    };
    emit().map_err(|e| io_failure("stdout", e))
}

/// Prints round-off residue as an exact zero.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}
