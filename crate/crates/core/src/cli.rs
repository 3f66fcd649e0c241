//! Command-line front end: argument parsing, config files, output writing.
//!
//! Exit codes: 0 success, 1 input error, 2 backend error, 3 parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bridge::{Backend, Backends, DEFAULT_TIMEOUT_MS, ENDPOINT_ENV, Endpoint, MockFixture, MockServer, Task};
use crate::error::{Error, ErrorClass, Result};
use crate::geometry::Rect;
use crate::loader::{DEFAULT_DPI, LoadOptions, PageSelection, load_document};
use crate::output::serialize_result;
use crate::pipeline::{PageResult, PipelineConfig, PipelineKind, PipelineReport, run_pipeline};
use crate::render::render_overlay;
use crate::table::{ExportFormat, export_table};

#[derive(Debug, Parser)]
#[command(name = "docxchain", version, about = "Parse document images and PDFs into structured JSON")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect and recognize all text, in reading order.
    Read(RunArgs),
    /// Recover the cell structure and content of a table.
    Table(TableArgs),
    /// Segment pages into layout regions with their text and tables.
    Structurize(RunArgs),
    /// Serve canned backend responses from a fixture file.
    #[command(hide = true)]
    MockBackend(MockArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Input image (.png, .jpg) or PDF.
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write an annotated .png of each page.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Backend for one task: TASK=classical|external|ENDPOINT, or all=...
    #[arg(long = "backend", value_name = "TASK=SPEC")]
    backends: Vec<String>,
    #[arg(long)]
    dpi: Option<u32>,
    /// first, all or a zero-based page index.
    #[arg(long)]
    page: Option<String>,
    /// Pages processed in parallel.
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-request timeout for external backends.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Print per-stage timings to standard error.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    run: RunArgs,
    /// json, html or csv.
    #[arg(long)]
    format: Option<String>,
    /// Table search region in pixels: x0,y0,x1,y1.
    #[arg(long)]
    region: Option<String>,
}

#[derive(Debug, Args)]
struct MockArgs {
    /// JSON object mapping task names to response envelopes.
    #[arg(long)]
    fixture: PathBuf,
    /// Serve HTTP on this address instead of standard input and output.
    #[arg(long)]
    listen: Option<String>,
}

/// Settings read from a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub output: Option<PathBuf>,
    pub render: Option<PathBuf>,
    pub dpi: Option<u32>,
    pub page: Option<String>,
    pub jobs: Option<usize>,
    pub format: Option<String>,
    pub region: Option<String>,
    pub timeout_ms: Option<u64>,
    pub timings: Option<bool>,
    #[serde(default)]
    pub backend: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e.message())))
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub pipeline: PipelineKind,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub render: Option<PathBuf>,
    pub backends: Backends,
    pub load: LoadOptions,
    pub jobs: usize,
    pub format: ExportFormat,
    pub region: Option<Rect>,
    pub timings: bool,
}

/// Parses `x0,y0,x1,y1`.
pub fn parse_region(s: &str) -> Result<Rect> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("region {s:?} is not x0,y0,x1,y1")))?;
    match v[..] {
        [x0, y0, x1, y1] => Rect::new(x0, y0, x1, y1),
        _ => Err(Error::InvalidInput(format!("region {s:?} is not x0,y0,x1,y1"))),
    }
}

/// Resolves one backend spec; `external` reads the endpoint from `env`.
pub fn parse_backend(spec: &str, env: Option<&str>, timeout_ms: u64) -> Result<Backend> {
    match spec.trim() {
        "classical" => Ok(Backend::Classical),
        "external" => {
            let endpoint =
                env.ok_or_else(|| Error::InvalidInput(format!("backend \"external\" needs {ENDPOINT_ENV} to be set")))?;
            Ok(Backend::external(Endpoint::from_str(endpoint)?, timeout_ms))
        }
        other => Ok(Backend::external(Endpoint::from_str(other)?, timeout_ms)),
    }
}

fn apply_backend(backends: &mut Backends, assignment: &str, env: Option<&str>, timeout_ms: u64) -> Result<()> {
    let (task, spec) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("backend {assignment:?} is not TASK=SPEC")))?;
    let backend = parse_backend(spec, env, timeout_ms)?;
    if task.trim() == "all" {
        for t in Task::ALL {
            backends.set(t, backend.clone());
        }
    } else {
        backends.set(Task::from_str(task.trim())?, backend);
    }
    Ok(())
}

impl CliConfig {
    fn resolve(
        kind: PipelineKind,
        args: RunArgs,
        table: Option<(Option<String>, Option<String>)>,
        env: Option<&str>,
    ) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let (format, region) = match table {
            Some((f, r)) => (f.or(file.format.clone()), r.or(file.region.clone())),
            None => (None, None),
        };
        let timeout_ms = args.timeout_ms.or(file.timeout_ms).unwrap_or(DEFAULT_TIMEOUT_MS);
        let mut backends = Backends::classical();
        for (task, spec) in &file.backend {
            apply_backend(&mut backends, &format!("{task}={spec}"), env, timeout_ms)?;
        }
        for a in &args.backends {
            apply_backend(&mut backends, a, env, timeout_ms)?;
        }
        let page_selection = match args.page.or(file.page) {
            Some(p) => p.parse()?,
            None => PageSelection::First,
        };
        let load = LoadOptions { dpi: args.dpi.or(file.dpi).unwrap_or(DEFAULT_DPI), page_selection };
        load.validate()?;
        let jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Error::InvalidInput("jobs must be at least 1".into()));
        }
        let render = args.render.or(file.render);
        if let Some(r) = &render {
            let png = r.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"));
            if !png {
                return Err(Error::InvalidInput(format!("render path {} must end in .png", r.display())));
            }
        }
        Ok(Self {
            pipeline: kind,
            input: args.input,
            output: args.output.or(file.output),
            render,
            backends,
            load,
            jobs,
            format: format.as_deref().map(ExportFormat::from_str).transpose()?.unwrap_or(ExportFormat::Json),
            region: region.as_deref().map(parse_region).transpose()?,
            timings: args.timings || file.timings.unwrap_or(false),
        })
    }
}

/// Path of the overlay for page `i`: the render path itself for the first
/// page, `<stem>-p<i>.png` beside it for later ones.
pub fn render_path(base: &Path, i: usize) -> PathBuf {
    if i == 0 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}-p{i}.png"))
}

fn format_report(cfg: &CliConfig, report: &PipelineReport) -> Result<String> {
    if cfg.format == ExportFormat::Json {
        return Ok(serialize_result(report));
    }
    let mut out = String::new();
    for p in &report.pages {
        if let PageResult::Table(t) = &p.result {
            out.push_str(&export_table(&t.table, cfg.format)?);
        }
    }
    Ok(out)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs one resolved configuration; returns the report after writing all
/// outputs.
pub fn execute(cfg: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<PipelineReport> {
    let doc = load_document(&cfg.input, &cfg.load)?;
    let pcfg =
        PipelineConfig { jobs: cfg.jobs, table_region: cfg.region, ..PipelineConfig::with_backends(&cfg.backends) };
    let report = run_pipeline(cfg.pipeline, &doc, &pcfg)?;
    let text = format_report(cfg, &report)?;
    match &cfg.output {
        Some(p) => write_file(p, text.as_bytes())?,
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    if let Some(base) = &cfg.render {
        for (i, (page, pr)) in doc.pages().iter().zip(&report.pages).enumerate() {
            write_file(&render_path(base, i), &render_overlay(page, &pr.result).encode_png())?;
        }
    }
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    if cfg.timings {
        for t in &report.timings {
            let _ = writeln!(stderr, "timing: {} {:.1} ms", t.stage, t.ms);
        }
    }
    Ok(report)
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Input => 1,
        ErrorClass::Backend => 2,
        ErrorClass::Parse => 3,
    }
}

fn mock_backend(args: MockArgs, stdout: &mut dyn Write) -> Result<()> {
    let fixture = MockFixture::from_file(&args.fixture)?;
    match args.listen {
        Some(addr) => {
            let server = MockServer::start_on(&addr, fixture)?;
            let _ = writeln!(stdout, "listening on {}", server.url());
            let _ = stdout.flush();
            loop {
                std::thread::park();
            }
        }
        None => {
            let stdin = std::io::stdin();
            crate::bridge::serve_stdio(&fixture, stdin.lock(), std::io::stdout().lock(), None)
                .map_err(|e| Error::io("<stdio>", e))
        }
    }
}

/// Same as [`run_cli`] with explicit streams and endpoint environment.
pub fn run_cli_with<I, T>(argv: I, env_endpoint: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                let _ = writeln!(stderr, "{}", first.trim());
            }
            return code;
        }
    };
    let resolved = match cli.command {
        Command::Read(a) => CliConfig::resolve(PipelineKind::GeneralTextReading, a, None, env_endpoint),
        Command::Structurize(a) => CliConfig::resolve(PipelineKind::DocumentStructurization, a, None, env_endpoint),
        Command::Table(t) => {
            CliConfig::resolve(PipelineKind::TableParsing, t.run, Some((t.format, t.region)), env_endpoint)
        }
        Command::MockBackend(m) => {
            return match mock_backend(m, stdout) {
                Ok(()) => 0,
                Err(e) => fail(stderr, &e),
            };
        }
    };
    match resolved.and_then(|cfg| execute(&cfg, stdout, stderr)) {
        Ok(_) => 0,
        Err(e) => fail(stderr, &e),
    }
}

fn fail(stderr: &mut dyn Write, e: &Error) -> i32 {
    let msg = e.to_string().replace('\n', " ");
    let _ = writeln!(stderr, "error: {msg}");
    exit_code(e.class())
}

/// Entry point of the `docxchain` binary.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(ENDPOINT_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, env.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli_with(args.iter().copied(), None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run(&["docxchain", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("structurize"));
        assert!(!out.contains("mock-backend"));
    }

    #[test]
    fn unknown_flag_is_input_error() {
        let (code, _, err) = run(&["docxchain", "read", "x.png", "--bogus"]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn format_only_on_table() {
        assert_eq!(run(&["docxchain", "read", "x.png", "--format", "csv"]).0, 1);
    }

    #[test]
    fn missing_input_file() {
        let (code, _, err) = run(&["docxchain", "read", "/nonexistent/x.png"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: "));
    }

    #[test]
    fn render_must_be_png() {
        let (code, _, err) = run(&["docxchain", "read", "x.png", "--render", "o.jpg"]);
        assert_eq!(code, 1);
        assert!(err.contains(".png"));
    }

    #[test]
    fn region_parsing() {
        assert_eq!(parse_region("1, 2,30,40").unwrap(), Rect::new(1., 2., 30., 40.).unwrap());
        assert!(parse_region("1,2,3").is_err());
        assert!(parse_region("5,5,1,1").is_err());
    }

    #[test]
    fn backend_specs() {
        assert!(parse_backend("classical", None, 10).unwrap().is_classical());
        assert!(parse_backend("external", None, 10).is_err());
        assert!(!parse_backend("external", Some("http://127.0.0.1:9"), 10).unwrap().is_classical());
        assert!(!parse_backend("stdio:python3 sidecar.py", None, 10).unwrap().is_classical());
        assert!(parse_backend("ftp://x", None, 10).is_err());
        let mut b = Backends::classical();
        apply_backend(&mut b, "all=http://127.0.0.1:9", None, 10).unwrap();
        assert!(Task::ALL.iter().all(|t| !b.get(*t).is_classical()));
        assert!(apply_backend(&mut b, "ocr=classical", None, 10).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("c.toml");
        std::fs::write(
            &conf,
            "dpi = 100\npage = \"all\"\njobs = 3\n[backend]\ntext_recognition = \"http://127.0.0.1:9\"\n",
        )
        .unwrap();
        let cli =
            Cli::try_parse_from(["docxchain", "read", "in.pdf", "--dpi", "200", "--config", conf.to_str().unwrap()])
                .unwrap();
        let Command::Read(a) = cli.command else { panic!() };
        let cfg = CliConfig::resolve(PipelineKind::GeneralTextReading, a, None, None).unwrap();
        assert_eq!(cfg.load.dpi, 200);
        assert_eq!(cfg.load.page_selection, PageSelection::All);
        assert_eq!(cfg.jobs, 3);
        assert!(!cfg.backends.text_recognition.is_classical());
        assert!(cfg.backends.text_detection.is_classical());
    }

    #[test]
    fn defaults_without_file() {
        let cli = Cli::try_parse_from(["docxchain", "table", "in.png"]).unwrap();
        let Command::Table(t) = cli.command else { panic!() };
        let cfg = CliConfig::resolve(PipelineKind::TableParsing, t.run, Some((t.format, t.region)), None).unwrap();
        assert_eq!(cfg.load, LoadOptions::default());
        assert_eq!(cfg.format, ExportFormat::Json);
        assert_eq!(cfg.jobs, 1);
        assert!(cfg.region.is_none());
    }

    #[test]
    fn unknown_config_key_rejected() {
        assert!(FileConfig::parse("colour = \"red\"\n").is_err());
        assert!(FileConfig::parse("dpi = \"high\"\n").is_err());
    }

    #[test]
    fn render_paths() {
        let b = Path::new("/tmp/out/ov.png");
        assert_eq!(render_path(b, 0), b);
        assert_eq!(render_path(b, 2), Path::new("/tmp/out/ov-p2.png"));
    }

    #[test]
    fn exit_codes_per_class() {
        assert_eq!(exit_code(Error::CorruptFile("x".into()).class()), 1);
        assert_eq!(exit_code(Error::BackendUnavailable("x".into()).class()), 2);
        assert_eq!(exit_code(Error::NotATable("x".into()).class()), 3);
    }
}
