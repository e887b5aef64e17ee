//! Command-line front end for `slag-core`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 a checked property
//! was violated (scan counterexample or superharmonicity violation).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use slag_core::gaussmap::{find_admissible_rotation_with, lewy_rotate};
use slag_core::regions::{classify, region_scan, ScanCondition, ScanConfig, ScanSummary, Spectrum, DEFAULT_TOLERANCE};
use slag_core::slagfield::{load_field, superharmonicity_report, FieldSource, GridSpec};
use slag_core::stability::{
    bracket_identity_residual, evaluate_form, evaluate_strengthened, pair_inequality_min,
    regrouped_form, trace_identity_residual, weighted_traces,
};
use slag_core::sym3tensor::{ambient_norm_sq, max_trace, random_trace_free, Sym3Tensor};

pub mod tensor_file;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "slag", version, about = "Region checks, stability forms and field reports for special Lagrangian graphs")]
struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Region membership of a single spectrum, or randomized scans.
    #[command(subcommand)]
    Region(RegionCommand),
    /// Evaluate the stability forms on a tensor.
    #[command(subcommand)]
    Form(FormCommand),
    /// Search for a rotation moving a family of spectra into Ξ ∩ 𝔅_K.
    Rotate(RotateArgs),
    /// Analyze a gridded potential.
    #[command(subcommand)]
    Field(FieldCommand),
}

#[derive(Debug, Subcommand)]
enum RegionCommand {
    Check(CheckArgs),
    Scan(ScanArgs),
}

#[derive(Debug, Subcommand)]
enum FormCommand {
    Eval(EvalArgs),
}

#[derive(Debug, Subcommand)]
enum FieldCommand {
    Report(FieldArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Comma-separated eigenvalues, e.g. 2,-0.5
    #[arg(long, allow_hyphen_values = true)]
    spectrum: String,
    #[arg(long = "K", value_name = "K", allow_negative_numbers = true)]
    k: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Condition {
    None,
    Xi,
    #[value(alias = "xi_prime")]
    Xiprime,
}

impl From<Condition> for ScanCondition {
    fn from(c: Condition) -> Self {
        match c {
            Condition::None => ScanCondition::None,
            Condition::Xi => ScanCondition::Xi,
            Condition::Xiprime => ScanCondition::XiPrime,
        }
    }
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "K", value_name = "K", allow_negative_numbers = true)]
    k: f64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Condition::None)]
    condition: Condition,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Eigenvalues in frame order; tensor indices refer to this order.
    #[arg(long, allow_hyphen_values = true)]
    spectrum: String,
    /// A tensor JSON file, or random:<seed> for a random unit trace-free tensor.
    #[arg(long)]
    tensor: String,
}

#[derive(Debug, Args)]
struct RotateArgs {
    /// File with one comma-separated spectrum per line.
    #[arg(long)]
    spectra: PathBuf,
    #[arg(long = "K", value_name = "K", allow_negative_numbers = true)]
    k: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// A field JSON file or builtin:<descriptor>.
    #[arg(long)]
    source: String,
    /// Phase constant; estimated from the data when omitted.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long = "K", value_name = "K", allow_negative_numbers = true)]
    k: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Grid spacing for builtin sources.
    #[arg(long)]
    spacing: Option<f64>,
    /// Half width of the centered box for builtin sources.
    #[arg(long)]
    half_width: Option<f64>,
}

/// What a subcommand produced.
struct Outcome {
    body: String,
    exit: i32,
}

struct Context<'a> {
    argv: &'a [String],
}

impl Context<'_> {
    /// Wraps a report with the tool version, the argument echo, the seed and
    /// the tolerance. Keys come out sorted, so equal inputs give equal bytes.
    fn envelope<T: Serialize>(&self, report: &T, seed: Option<u64>, tol: f64) -> Result<String, String> {
        self.envelope_with(report, seed, tol, Vec::new())
    }

    fn envelope_with<T: Serialize>(
        &self,
        report: &T,
        seed: Option<u64>,
        tol: f64,
        extra: Vec<(&str, Value)>,
    ) -> Result<String, String> {
        let mut map = match serde_json::to_value(report).map_err(|e| e.to_string())? {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("report".into(), other);
                m
            }
        };
        map.insert("tool".into(), json!({ "name": "slag", "version": env!("CARGO_PKG_VERSION") }));
        map.insert("argv".into(), json!(self.argv));
        map.insert("seed".into(), json!(seed));
        map.insert("tolerance".into(), json!(tol));
        for (k, v) in extra {
            map.insert(k.into(), v);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).map_err(|e| e.to_string())?;
        s.push('\n');
        Ok(s)
    }
}

/// Runs the tool on `argv` (without the program name), writing the report to
/// `out` or the `--output` file and diagnostics to `err`.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("slag".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let ctx = Context { argv };
    let outcome = match dispatch(&ctx, &cli.command) {
        Ok(o) => o,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INPUT;
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_INPUT;
    }
    if outcome.exit == EXIT_VIOLATION {
        let _ = writeln!(err, "property violation found, see report");
    }
    outcome.exit
}

fn dispatch(ctx: &Context, cmd: &Command) -> Result<Outcome, String> {
    match cmd {
        Command::Region(RegionCommand::Check(a)) => region_check(ctx, a),
        Command::Region(RegionCommand::Scan(a)) => region_scan_cmd(ctx, a),
        Command::Form(FormCommand::Eval(a)) => form_eval(ctx, a),
        Command::Rotate(a) => rotate(ctx, a),
        Command::Field(FieldCommand::Report(a)) => field_report(ctx, a),
    }
}

fn ok(body: String) -> Outcome {
    Outcome { body, exit: EXIT_OK }
}

fn err_str(e: slag_core::Error) -> String {
    e.to_string()
}

fn region_check(ctx: &Context, a: &CheckArgs) -> Result<Outcome, String> {
    let spec: Spectrum = a.spectrum.parse().map_err(err_str)?;
    let report = classify(&spec, a.k, a.tol).map_err(err_str)?;
    Ok(ok(ctx.envelope(&report, None, a.tol)?))
}

fn region_scan_cmd(ctx: &Context, a: &ScanArgs) -> Result<Outcome, String> {
    let cfg = ScanConfig::new(a.n, a.k, a.count, a.seed)
        .with_condition(a.condition.into())
        .with_tolerance(a.tol);
    let summary = region_scan(&cfg).map_err(err_str)?;
    let body = match a.format {
        Format::Json => ctx.envelope(&summary, Some(a.seed), a.tol)?,
        Format::Csv => scan_csv(&summary),
    };
    let exit = if summary.counterexamples.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome { body, exit })
}

fn scan_csv(s: &ScanSummary) -> String {
    let n = s.config.n;
    let mut out = String::from("index,attempts");
    for i in 1..=n {
        let _ = write!(out, ",lambda_{i}");
    }
    out.push_str(",ball,xi,xi_prime,m,strengthened,in_ball,in_xi,in_xi_prime,in_m,in_strengthened\n");
    for row in &s.rows {
        let r = &row.report;
        let _ = write!(out, "{},{}", row.index, row.attempts);
        for v in r.spectrum.values() {
            let _ = write!(out, ",{v}");
        }
        let m = &r.margins;
        let f = &r.flags;
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{},{},{}",
            m.ball, m.xi, m.xi_prime, m.m, m.strengthened, f.ball, f.xi, f.xi_prime, f.m, f.strengthened
        );
    }
    out
}

fn parse_frame(s: &str) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid eigenvalue {t:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty spectrum".into());
    }
    Ok(values)
}

#[derive(Serialize)]
struct FormReport {
    frame_eigenvalues: Vec<f64>,
    tensor: Sym3Tensor,
    norm_sq: f64,
    max_trace: f64,
    f: f64,
    g: f64,
    weighted_traces: Vec<f64>,
    bracket_identity_residual: f64,
    /// Present for trace-free tensors only.
    trace_identity_residual: Option<f64>,
    regrouped_minus_f: Option<f64>,
    /// Present for n >= 3.
    pair_inequality_min: Option<f64>,
}

fn form_eval(ctx: &Context, a: &EvalArgs) -> Result<Outcome, String> {
    let lambda = parse_frame(&a.spectrum)?;
    let n = lambda.len();
    let (tensor, seed) = match a.tensor.strip_prefix("random:") {
        Some(s) => {
            let seed: u64 = s.parse().map_err(|_| format!("invalid seed {s:?}"))?;
            (random_trace_free(n, seed).map_err(err_str)?, Some(seed))
        }
        None => (tensor_file::load(Path::new(&a.tensor))?, None),
    };
    if tensor.n() != n {
        return Err(format!("tensor has n = {}, spectrum has {n} values", tensor.n()));
    }
    let f = evaluate_form(&lambda, &tensor).map_err(err_str)?;
    let trace_free = trace_identity_residual(&lambda, &tensor).ok();
    let report = FormReport {
        norm_sq: ambient_norm_sq(&tensor),
        max_trace: max_trace(&tensor),
        f,
        g: evaluate_strengthened(&lambda, &tensor).map_err(err_str)?,
        weighted_traces: weighted_traces(&lambda, &tensor).map_err(err_str)?,
        bracket_identity_residual: bracket_identity_residual(&lambda, &tensor).map_err(err_str)?,
        regrouped_minus_f: match trace_free {
            Some(_) => Some(regrouped_form(&lambda, &tensor).map_err(err_str)? - f),
            None => None,
        },
        trace_identity_residual: trace_free,
        pair_inequality_min: if n >= 3 {
            Some(pair_inequality_min(&lambda, &tensor).map_err(err_str)?)
        } else {
            None
        },
        frame_eigenvalues: lambda,
        tensor,
    };
    Ok(ok(ctx.envelope(&report, seed, DEFAULT_TOLERANCE)?))
}

fn read_spectra(path: &Path) -> Result<Vec<Spectrum>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let spec: Spectrum = line
            .parse()
            .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        if let Some(first) = out.first() {
            let first: &Spectrum = first;
            if first.n() != spec.n() {
                return Err(format!(
                    "{}:{}: expected {} eigenvalues, found {}",
                    path.display(),
                    i + 1,
                    first.n(),
                    spec.n()
                ));
            }
        }
        out.push(spec);
    }
    if out.is_empty() {
        return Err(format!("{}: no spectra", path.display()));
    }
    Ok(out)
}

#[derive(Serialize)]
struct RotateReport {
    #[serde(flatten)]
    search: slag_core::gaussmap::RotationSearch,
    family_size: usize,
    /// The family after rotation by the chosen angle.
    rotated: Vec<Spectrum>,
}

fn rotate(ctx: &Context, a: &RotateArgs) -> Result<Outcome, String> {
    let spectra = read_spectra(&a.spectra)?;
    let search = find_admissible_rotation_with(&spectra, a.k, a.tol).map_err(err_str)?;
    let rotated = match search.theta {
        Some(t) => spectra
            .iter()
            .map(|s| lewy_rotate(s, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err_str)?,
        None => Vec::new(),
    };
    let report = RotateReport {
        family_size: spectra.len(),
        search,
        rotated,
    };
    Ok(ok(ctx.envelope(&report, None, a.tol)?))
}

fn field_report(ctx: &Context, a: &FieldArgs) -> Result<Outcome, String> {
    let source = FieldSource::parse(&a.source).map_err(err_str)?;
    let grid = match (&source, a.spacing, a.half_width) {
        (_, None, None) => None,
        (FieldSource::File(_), _, _) => {
            return Err("--spacing and --half-width apply to builtin sources only".into())
        }
        (FieldSource::Builtin(b), s, w) => {
            let d = b.default_grid();
            Some(GridSpec::new(w.unwrap_or(d.half_width), s.unwrap_or(d.spacing)))
        }
    };
    let field = load_field(&source, grid).map_err(err_str)?;
    let report = superharmonicity_report(&field, a.k, a.c, a.tol).map_err(err_str)?;
    let exit = if report.violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let body = ctx.envelope_with(&report, None, a.tol, vec![("origin", json!(field.origin()))])?;
    Ok(Outcome { body, exit })
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&argv, &mut stdout.lock(), &mut stderr.lock())
}
