use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spectral_verify::aig::Aig;
use spectral_verify::genbench::{generate, inject_bugs, Family, GenSpec, Region};
use spectral_verify::netlist::aiger::parse_aiger;
use spectral_verify::netlist::blif::{emit_blif, parse_blif};
use spectral_verify::netlist::spec::{parse_spec, ResolvedSpec};
use spectral_verify::netlist::Netlist;
use spectral_verify::pipeline::{abstract_circuit, cross_check, verify, AbstractionStatus, Verdict, VerifyOptions};
use spectral_verify::poly::DEFAULT_TERM_LIMIT;
use spectral_verify::rewrite::DEFAULT_MEMORY_LIMIT;

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;
const EX_IOERR: u8 = 74;

#[derive(Parser)]
#[command(name = "spectral", version, about = "Spectral verification and abstraction of arithmetic circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check circuits against a word-level specification.
    Verify(VerifyArgs),
    /// Recover the word-level function of a circuit.
    Abstract(AbstractArgs),
    /// Write the algebraic spectrum of a circuit as CSV, optionally SVG.
    Spectrum(SpectrumArgs),
    /// Print the input signature of a circuit.
    Extract(ExtractArgs),
    /// Generate a benchmark circuit, optionally with injected bugs.
    Gen(GenArgs),
    /// Compare spectral, full-rewrite and simulation results.
    CrossCheck(CrossCheckArgs),
}

#[derive(Args, Clone)]
struct Limits {
    /// Ceiling on polynomial terms.
    #[arg(long, default_value_t = DEFAULT_TERM_LIMIT)]
    term_limit: usize,
    /// Time budget per circuit, in seconds.
    #[arg(long, default_value_t = 600.0)]
    time_budget: f64,
    /// Approximate memory ceiling for rewriting, in MiB.
    #[arg(long, default_value_t = DEFAULT_MEMORY_LIMIT >> 20)]
    memory_limit: usize,
}

impl Limits {
    fn options(&self) -> Result<VerifyOptions, CliError> {
        if !(self.time_budget.is_finite() && self.time_budget > 0.0) {
            return Err(CliError::Usage("--time-budget must be a positive number of seconds".into()));
        }
        Ok(VerifyOptions {
            term_limit: self.term_limit,
            memory_limit: self.memory_limit << 20,
            time_budget: Some(Duration::from_secs_f64(self.time_budget)),
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuits (BLIF, AIGER ASCII or binary).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Specification text, e.g. "F = A*B", or a path to a file holding it.
    #[arg(long)]
    spec: String,
    #[command(flatten)]
    limits: Limits,
    /// Do not fall back to full rewriting when extraction fails.
    #[arg(long)]
    no_fallback: bool,
    /// Write intermediate spectra as JSON lines (single input only).
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Verify this many files concurrently.
    #[arg(long, short = 'j', default_value_t = 1)]
    jobs: usize,
    /// Omit phase timings so that reports are byte-reproducible.
    #[arg(long)]
    no_timings: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AbstractArgs {
    input: PathBuf,
    #[command(flatten)]
    limits: Limits,
    #[arg(long)]
    no_timings: bool,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    input: PathBuf,
    #[command(flatten)]
    limits: Limits,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also draw component `--k` as an SVG bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Monomial size to draw; defaults to the largest present.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    input: PathBuf,
    #[command(flatten)]
    limits: Limits,
    /// Also write the AIG as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Blif,
    Aag,
    Aig,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Blif => "blif",
            Format::Aag => "aag",
            Format::Aig => "aig",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Adders,
    All,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    /// Operand width in bits.
    #[arg(short = 'n', long = "width")]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of bugs to inject.
    #[arg(long, default_value_t = 0)]
    bugs: usize,
    /// Gates eligible for mutation.
    #[arg(long, value_enum, default_value_t = RegionArg::Adders)]
    region: RegionArg,
    #[arg(long, value_enum, default_value_t = Format::Blif)]
    format: Format,
    /// Output directory.
    #[arg(long, short = 'o', default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CrossCheckArgs {
    input: PathBuf,
    #[arg(long)]
    spec: String,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EX_USAGE,
            CliError::Data(_) => EX_DATAERR,
            CliError::Io(_) => EX_IOERR,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let bytes = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let aiger = matches!(ext, "aag" | "aig") || bytes.starts_with(b"aag ") || bytes.starts_with(b"aig ");
    let parsed = if aiger {
        parse_aiger(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{}: not UTF-8", path.display())))?;
        parse_blif(&text)
    };
    parsed.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Inline specification text, or the contents of the file it names.
fn spec_text(arg: &str) -> Result<String, CliError> {
    let p = Path::new(arg);
    if !arg.contains('=') || p.is_file() {
        let bytes = read(p)?;
        return String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{arg}: not UTF-8")));
    }
    Ok(arg.to_string())
}

fn resolve(text: &str, n: &Netlist, path: &Path) -> Result<ResolvedSpec, CliError> {
    let spec = parse_spec(text).map_err(|e| CliError::Data(format!("specification: {e}")))?;
    spec.resolve(n).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn verify_one(path: &Path, spec: &str, opts: &VerifyOptions) -> Result<Verdict, CliError> {
    let n = load_netlist(path)?;
    let rs = resolve(spec, &n, path)?;
    let g = Aig::from_netlist(&n);
    verify(&g, &rs, opts).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Worst exit code over several verdicts: refuted, then inconclusive.
fn combined_exit(codes: &[i32]) -> u8 {
    if codes.contains(&1) {
        1
    } else if codes.contains(&2) {
        2
    } else {
        0
    }
}

fn run_verify(a: VerifyArgs) -> Result<u8, CliError> {
    if a.trace.is_some() && a.inputs.len() > 1 {
        return Err(CliError::Usage("--trace takes a single input".into()));
    }
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let spec = spec_text(&a.spec)?;
    let mut opts = a.limits.options()?;
    opts.fallback = !a.no_fallback;
    opts.trace = a.trace.is_some();

    let results: Vec<Mutex<Option<Result<Verdict, CliError>>>> = a.inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.min(a.inputs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = a.inputs.get(i) else { break };
                *results[i].lock().unwrap() = Some(verify_one(path, &spec, &opts));
            });
        }
    });
    let mut verdicts = Vec::new();
    for r in results {
        let mut v = r.into_inner().unwrap().expect("every input was processed")?;
        if a.no_timings {
            v.timings_ms.clear();
        }
        verdicts.push(v);
    }

    if let (Some(path), Some(trace)) = (&a.trace, verdicts[0].trace.as_ref()) {
        write(path, trace.to_jsonl())?;
    }
    let text = if verdicts.len() == 1 {
        verdicts[0].to_json()
    } else {
        let items: Vec<_> = a
            .inputs
            .iter()
            .zip(&verdicts)
            .map(|(p, v)| json!({ "file": p.display().to_string(), "verdict": serde_json::to_value(v).unwrap() }))
            .collect();
        serde_json::to_string_pretty(&items).expect("reports serialize")
    };
    emit(a.out.as_deref(), &text)?;
    Ok(combined_exit(&verdicts.iter().map(Verdict::exit_code).collect::<Vec<_>>()))
}

fn run_abstract(a: AbstractArgs) -> Result<u8, CliError> {
    let g = Aig::from_netlist(&load_netlist(&a.input)?);
    let mut r = abstract_circuit(&g, &a.limits.options()?);
    if a.no_timings {
        r.timings_ms.clear();
    }
    emit(a.out.as_deref(), &r.to_json())?;
    Ok(if r.status == AbstractionStatus::Ok { 0 } else { 2 })
}

fn run_spectrum(a: SpectrumArgs) -> Result<u8, CliError> {
    let g = Aig::from_netlist(&load_netlist(&a.input)?);
    let r = abstract_circuit(&g, &a.limits.options()?);
    let Some(s) = r.spectrum else {
        eprintln!("spectral: {}", r.detail.unwrap_or_else(|| "no spectrum".into()));
        return Ok(2);
    };
    match &a.csv {
        Some(p) => write(p, s.to_csv())?,
        None => print!("{}", s.to_csv()),
    }
    if let Some(path) = &a.svg {
        let k = a.k.or_else(|| s.sizes().last().copied()).unwrap_or(1);
        let svg = s.to_svg(k).ok_or_else(|| CliError::Usage(format!("spectrum has no component k={k}")))?;
        write(path, svg)?;
    }
    Ok(0)
}

fn run_extract(a: ExtractArgs) -> Result<u8, CliError> {
    let g = Aig::from_netlist(&load_netlist(&a.input)?);
    if let Some(p) = &a.dot {
        write(p, g.to_dot())?;
    }
    let r = abstract_circuit(&g, &a.limits.options()?);
    match r.sig_in {
        Some(p) => {
            println!("{}", p.render(|v| g.var_name(v.0)));
            Ok(0)
        }
        None => {
            eprintln!("spectral: {}", r.detail.unwrap_or_else(|| "extraction failed".into()));
            Ok(2)
        }
    }
}

fn run_gen(a: GenArgs) -> Result<u8, CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("width must be at least 1".into()));
    }
    let g = generate(a.family, a.n);
    let (net, mutations) = if a.bugs == 0 {
        (g.netlist, Vec::new())
    } else {
        let region = match a.region {
            RegionArg::Adders => Region::Adders,
            RegionArg::All => Region::All,
        };
        inject_bugs(&g.netlist, &g.adder_region, region, a.bugs, a.seed).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let stem = if a.bugs == 0 {
        format!("{}_{}", a.family, a.n)
    } else {
        format!("{}_{}_s{}_b{}", a.family, a.n, a.seed, a.bugs)
    };
    fs::create_dir_all(&a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    let file = a.out.join(format!("{stem}.{}", a.format.extension()));
    let bytes = match a.format {
        Format::Blif => emit_blif(&net).into_bytes(),
        Format::Aag => Aig::from_netlist(&net).to_aiger(false),
        Format::Aig => Aig::from_netlist(&net).to_aiger(true),
    };
    write(&file, bytes)?;
    let spec = GenSpec { family: a.family, width: a.n, seed: a.seed, bugs: a.bugs };
    let manifest = json!({
        "generator": spec,
        "netlist": file.file_name().unwrap().to_string_lossy(),
        "spec": a.family.spec(),
        "inputs": net.num_inputs(),
        "outputs": net.outputs().len(),
        "gates": net.gates().len(),
        "mutations": mutations,
    });
    let manifest_path = a.out.join(format!("{stem}.json"));
    write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;
    println!("{}", file.display());
    println!("{}", manifest_path.display());
    Ok(0)
}

fn run_cross_check(a: CrossCheckArgs) -> Result<u8, CliError> {
    let n = load_netlist(&a.input)?;
    let rs = resolve(&spec_text(&a.spec)?, &n, &a.input)?;
    let g = Aig::from_netlist(&n);
    let r = cross_check(&g, &rs, &a.limits.options()?).map_err(|e| CliError::Data(e.to_string()))?;
    emit(a.out.as_deref(), &r.to_json())?;
    Ok(if r.agree { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EX_USAGE } else { 0 });
        }
    };
    let r = match cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Abstract(a) => run_abstract(a),
        Command::Spectrum(a) => run_spectrum(a),
        Command::Extract(a) => run_extract(a),
        Command::Gen(a) => run_gen(a),
        Command::CrossCheck(a) => run_cross_check(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("spectral: {e}");
            ExitCode::from(e.code())
        }
    }
}
