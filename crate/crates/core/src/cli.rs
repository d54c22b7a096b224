//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connection::{GeometryError, GeometryOptions};
use crate::lagrangian::{check_kronecker_regularity, RegularityReport};
use crate::report::{geometry_reports, verify, GeometryReport, SuiteReport, What};
use crate::sampling::{sample_points, SampleBox, SampleError};
use crate::scenario::{load_scenario, FamilyKind, JetPoint, Scenario, ScenarioError};

#[derive(Debug, Parser)]
#[command(name = "jetgeom", version, about = "Geometry of metrical multi-time Lagrange spaces on 1-jet bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the scenario and check Kronecker h-regularity.
    Describe(RunArgs),
    /// Per-point report of one family of geometric objects.
    Geometry {
        #[arg(value_enum)]
        what: What,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every identity check and print one line per class.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Pretty-printed JSON.
    Text,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario document (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Explicit points as a TOML file with `[[point]]` tables.
    #[arg(long, conflicts_with_all = ["random", "seed", "sample_box"])]
    pub points: Option<PathBuf>,
    /// Number of random points.
    #[arg(long, default_value_t = 10)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coordinate box `lo,hi` shared by every coordinate.
    #[arg(long = "box", value_name = "LO,HI", value_parser = parse_box, allow_hyphen_values = true)]
    pub sample_box: Option<SampleBox>,
    /// Residual tolerance; defaults to the scenario's.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Adds a constant to one connection coefficient.
    #[arg(long, hide = true)]
    pub fault: Option<f64>,
}

fn parse_box(s: &str) -> Result<SampleBox, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
    Ok(SampleBox { lo, hi })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("points file {path}: {reason}")]
    Points { path: String, reason: String },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("encoding output: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Geometry(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsFile {
    point: Vec<JetPoint>,
}

pub fn load_points(path: &Path, s: &Scenario) -> Result<Vec<JetPoint>, CliError> {
    let err = |reason: String| CliError::Points { path: path.display().to_string(), reason };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let file: PointsFile = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
    for (k, p) in file.point.iter().enumerate() {
        p.validate(s.dims).map_err(|r| err(format!("point {}: {r}", k + 1)))?;
    }
    if file.point.is_empty() {
        return Err(err("no points".into()));
    }
    Ok(file.point)
}

#[derive(Debug, Serialize)]
pub struct DescribeReport {
    pub summary: String,
    pub family: FamilyKind,
    pub p: usize,
    pub n: usize,
    pub regularity: RegularityReport,
}

/// Result of one command: the rendered document and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

struct Prepared {
    scenario: Scenario,
    points: Vec<JetPoint>,
    tol: f64,
    opts: GeometryOptions,
}

fn prepare(a: &RunArgs) -> Result<Prepared, CliError> {
    let scenario = load_scenario(&a.scenario)?;
    let points = match &a.points {
        Some(path) => load_points(path, &scenario)?,
        None => sample_points(&scenario, a.random, a.seed, a.sample_box.unwrap_or_default())?,
    };
    let tol = a.tol.unwrap_or(scenario.tol);
    Ok(Prepared { scenario, points, tol, opts: GeometryOptions { fault: a.fault } })
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Encode(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_doc(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| CliError::Encode(e.to_string());
    w.write_record(header).map_err(enc)?;
    for r in rows {
        w.write_record(&r).map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
}

fn join(ix: &[usize]) -> String {
    ix.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

pub fn describe_report(s: &Scenario, pts: &[JetPoint], tol: f64) -> DescribeReport {
    let regularity = check_kronecker_regularity(s, pts, tol);
    let mut summary = format!("Kronecker h-regular: {}; family: {}", if regularity.pass { "PASS" } else { "FAIL" }, s.kind());
    if let Some(bad) = regularity.points.iter().find(|p| !p.verdict) {
        summary.push_str(&format!("; offending point: {}", bad.point));
    }
    if let Some(p) = regularity.points.first() {
        summary.push_str(&format!("; signature of g: (+{}, -{}, 0:{})", p.signature.positive, p.signature.negative, p.signature.zero));
    }
    DescribeReport { summary, family: s.kind(), p: s.dims.p, n: s.dims.n, regularity }
}

fn render_describe(r: &DescribeReport, f: Format) -> Result<String, CliError> {
    match f {
        Format::Text => json(r),
        Format::Csv => csv_doc(
            &["point", "kronecker_residual", "cubic_velocity", "positive", "negative", "zero", "verdict"],
            r.regularity.points.iter().enumerate().map(|(k, p)| {
                vec![
                    (k + 1).to_string(),
                    format!("{:e}", p.kronecker_residual),
                    fmt_opt(p.cubic_velocity),
                    p.signature.positive.to_string(),
                    p.signature.negative.to_string(),
                    p.signature.zero.to_string(),
                    if p.verdict { "PASS" } else { "FAIL" }.into(),
                ]
            }),
        ),
    }
}

fn render_geometry(reports: &[GeometryReport], f: Format) -> Result<String, CliError> {
    match f {
        Format::Text => json(&reports),
        Format::Csv => {
            let mut rows = Vec::new();
            for (k, r) in reports.iter().enumerate() {
                let pt = (k + 1).to_string();
                for t in &r.tables {
                    for c in &t.components {
                        rows.push(vec![pt.clone(), "table".into(), t.key.clone(), join(&c.index), format!("{:e}", c.value), String::new()]);
                    }
                }
                for s in &r.scalars {
                    rows.push(vec![pt.clone(), "scalar".into(), s.name.clone(), String::new(), format!("{:e}", s.value), String::new()]);
                }
                for res in &r.residuals {
                    let verdict = if res.pass { "PASS" } else { "FAIL" };
                    rows.push(vec![pt.clone(), "residual".into(), res.name.clone(), String::new(), format!("{:e}", res.value), verdict.into()]);
                }
            }
            csv_doc(&["point", "kind", "name", "index", "value", "verdict"], rows)
        }
    }
}

/// One line per identity class, as printed by `verify`.
pub fn suite_lines(r: &SuiteReport) -> Vec<String> {
    r.lines
        .iter()
        .map(|l| format!("{:<38} max residual {:>10.3e}  {}", l.label, l.max_residual, if l.pass { "PASS" } else { "FAIL" }))
        .collect()
}

fn render_suite(r: &SuiteReport, f: Format) -> Result<String, CliError> {
    match f {
        Format::Text => {
            #[derive(Serialize)]
            struct Doc<'a> {
                lines: Vec<String>,
                summary: &'a SuiteReport,
            }
            json(&Doc { lines: suite_lines(r), summary: r })
        }
        Format::Csv => csv_doc(
            &["class", "max_residual", "worst", "worst_point", "verdict"],
            r.lines.iter().map(|l| {
                let (name, pt) = l.worst.clone().map_or((String::new(), String::new()), |(n, p)| (n, p.to_string()));
                vec![l.label.to_string(), format!("{:e}", l.max_residual), name, pt, if l.pass { "PASS" } else { "FAIL" }.into()]
            }),
        ),
    }
}

/// Executes a parsed command without touching the process state.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (args, outcome) = match &cli.command {
        Command::Describe(a) => {
            let p = prepare(a)?;
            let r = describe_report(&p.scenario, &p.points, p.tol);
            (a, Outcome { output: render_describe(&r, a.format)?, pass: r.regularity.pass })
        }
        Command::Geometry { what, run } => {
            let p = prepare(run)?;
            let reports = geometry_reports(&p.scenario, &p.points, &[*what], p.tol, &p.opts)?;
            let pass = reports.iter().all(|r| r.pass);
            (run, Outcome { output: render_geometry(&reports, run.format)?, pass })
        }
        Command::Verify(a) => {
            let p = prepare(a)?;
            let r = verify(&p.scenario, &p.points, p.tol, &p.opts)?;
            (a, Outcome { output: render_suite(&r, a.format)?, pass: r.pass })
        }
    };
    if let Some(path) = &args.out {
        std::fs::File::create(path)?.write_all(outcome.output.as_bytes())?;
    }
    Ok(outcome)
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let to_stdout = match &cli.command {
                Command::Describe(a) | Command::Verify(a) | Command::Geometry { run: a, .. } => a.out.is_none(),
            };
            if to_stdout {
                print!("{}", out.output);
            }
            if let Command::Describe(_) = cli.command {
                if !out.pass {
                    eprintln!("regularity check failed");
                }
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
