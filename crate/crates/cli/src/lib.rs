//! The `evrforge` command line: check, report, trace, score, diff, init and
//! export over register files.

mod report;
mod template;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use evrforge::dsl::{parse_register, ParseResult};
use evrforge::rules::{attach_spans, run_rules, Diagnostic};
use evrforge::trace::{
    build_graph, coverage_report, coverage_to_csv, diff_registers, graph_to_dot, maturity_score,
    trace_chain,
};
use evrforge::{export_interchange, RegisterDocument, Severity};
use thiserror::Error;

pub use report::{render_audit, render_coverage, render_mission, Findings};
pub use template::init_template;

/// Process exit status. The numeric codes are part of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Clean = 0,
    Warnings = 1,
    Errors = 2,
    Failure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{} already exists; pass --force to overwrite", .0.display())]
    Exists(PathBuf),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Output(#[from] io::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "evrforge",
    version,
    about = "Check and report on Ethical Value Register files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a register and run the rule catalog.
    Check {
        path: PathBuf,
        /// Comma-separated rule ids; all rules when absent.
        #[arg(long, value_delimiter = ',')]
        rules: Vec<String>,
        #[arg(long, value_enum, default_value_t = CheckFormat::Text)]
        format: CheckFormat,
        /// Exit with code 2 on warnings too.
        #[arg(long)]
        strict: bool,
    },
    /// Render an audit, mission or coverage report.
    Report {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportKind::Audit)]
        kind: ReportKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the chain from a core value down to an entity.
    Trace { path: PathBuf, id: String },
    /// Print the ethical maturity score.
    Score { path: PathBuf },
    /// Compare two versions of a register.
    Diff { old: PathBuf, new: PathBuf },
    /// Write a commented register template.
    Init {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Export the register as interchange JSON, a DOT graph or a coverage CSV.
    Export {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckFormat {
    Text,
    Interchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Audit,
    Mission,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Interchange,
    Dot,
    Csv,
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if informational {
                let _ = write!(stdout, "{}", e.render());
                return ExitStatus::Clean;
            }
            let _ = write!(stderr, "{}", e.render());
            return ExitStatus::Failure;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "evrforge: {e}");
            ExitStatus::Failure
        }
    }
}

fn execute(
    command: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    match command {
        Command::Check {
            path,
            rules,
            format,
            strict,
        } => check(&path, &rules, format, strict, stdout, stderr),
        Command::Report { path, kind, out } => {
            let Some((doc, findings)) = load_checked(&path, stderr)? else {
                return Ok(ExitStatus::Errors);
            };
            let text = match kind {
                ReportKind::Audit => render_audit(&doc, &findings),
                ReportKind::Mission => render_mission(&doc),
                ReportKind::Coverage => render_coverage(&doc),
            };
            emit(&text, out.as_deref(), stdout)?;
            Ok(findings.status(false))
        }
        Command::Trace { path, id } => {
            let Some(doc) = load(&path, stderr)? else {
                return Ok(ExitStatus::Errors);
            };
            let chain = trace_chain(&build_graph(&doc), &id)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            for node in chain {
                writeln!(stdout, "{}  {}  {}", node.id, node.kind, node.name)?;
            }
            Ok(ExitStatus::Clean)
        }
        Command::Score { path } => {
            let Some(doc) = load(&path, stderr)? else {
                return Ok(ExitStatus::Errors);
            };
            writeln!(stdout, "{}", report::score_line(&maturity_score(&doc)))?;
            Ok(ExitStatus::Clean)
        }
        Command::Diff { old, new } => {
            let old_doc = load(&old, stderr)?;
            let new_doc = load(&new, stderr)?;
            let (Some(old_doc), Some(new_doc)) = (old_doc, new_doc) else {
                return Ok(ExitStatus::Errors);
            };
            let changes = diff_registers(&old_doc, &new_doc);
            if changes.new_core_values_require_reprioritization {
                writeln!(stdout, "REPRIORITIZATION REQUIRED")?;
            }
            if changes.is_empty() {
                writeln!(stdout, "no changes")?;
            }
            for line in changes.lines() {
                writeln!(stdout, "{line}")?;
            }
            Ok(ExitStatus::Clean)
        }
        Command::Init { name, out, force } => {
            if name.trim().is_empty() {
                return Err(CliError::Invalid("project name must not be empty".into()));
            }
            let text = init_template(&name);
            match out {
                Some(path) => {
                    if path.exists() && !force {
                        return Err(CliError::Exists(path));
                    }
                    fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
                }
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(ExitStatus::Clean)
        }
        Command::Export { path, format, out } => {
            let Some(doc) = load(&path, stderr)? else {
                return Ok(ExitStatus::Errors);
            };
            let text = match format {
                ExportFormat::Interchange => export_interchange(&doc),
                ExportFormat::Dot => graph_to_dot(&build_graph(&doc)),
                ExportFormat::Csv => coverage_to_csv(&coverage_report(&doc)),
            };
            emit(&text, out.as_deref(), stdout)?;
            Ok(ExitStatus::Clean)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse(path: &Path) -> Result<ParseResult, CliError> {
    let text = read(path)?;
    Ok(parse_register(&text, &path.display().to_string()))
}

/// Parses a register, printing parse diagnostics. `None` when it has errors.
fn load(path: &Path, stderr: &mut dyn Write) -> Result<Option<RegisterDocument>, CliError> {
    let result = parse(path)?;
    for d in &result.diagnostics {
        writeln!(stderr, "{d}")?;
    }
    Ok(result.document)
}

/// Parses a register and runs every rule, printing all diagnostics and the
/// summary line. `None` when parsing failed.
fn load_checked(
    path: &Path,
    stderr: &mut dyn Write,
) -> Result<Option<(RegisterDocument, Findings)>, CliError> {
    let result = parse(path)?;
    let findings = findings(&result, &[])?;
    print_text(&findings, stderr)?;
    Ok(result.document.map(|doc| (doc, findings)))
}

fn findings(result: &ParseResult, selection: &[&str]) -> Result<Findings, CliError> {
    let mut rules: Vec<Diagnostic> = Vec::new();
    if let Some(doc) = &result.document {
        rules = run_rules(doc, selection).map_err(|e| CliError::Invalid(e.to_string()))?;
        attach_spans(&mut rules, &result.source_map);
    }
    Ok(Findings {
        parse: result.diagnostics.clone(),
        rules,
    })
}

fn print_text(findings: &Findings, stderr: &mut dyn Write) -> io::Result<()> {
    for d in &findings.parse {
        writeln!(stderr, "{d}")?;
    }
    for d in &findings.rules {
        match &d.span {
            Some(span) => writeln!(stderr, "{d} ({span})")?,
            None => writeln!(stderr, "{d}")?,
        }
    }
    writeln!(stderr, "{}", findings.summary())
}

fn check(
    path: &Path,
    selection: &[String],
    format: CheckFormat,
    strict: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let result = parse(path)?;
    let selection: Vec<&str> = selection.iter().map(String::as_str).collect();
    let findings = findings(&result, &selection)?;
    match format {
        CheckFormat::Text => print_text(&findings, stderr)?,
        CheckFormat::Interchange => {
            let json = serde_json::json!({
                "file": path.display().to_string(),
                "errors": findings.count(Severity::Error),
                "warnings": findings.count(Severity::Warning),
                "parse": findings.parse,
                "rules": findings.rules,
            });
            writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&json).expect("JSON values serialize")
            )?;
            writeln!(stderr, "{}", findings.summary())?;
        }
    }
    Ok(findings.status(strict))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

impl Findings {
    pub fn count(&self, severity: Severity) -> usize {
        self.parse.iter().filter(|d| d.severity == severity).count()
            + self.rules.iter().filter(|d| d.severity == severity).count()
    }

    /// `N errors, M warnings`.
    pub fn summary(&self) -> String {
        let plural = |n: usize, word: &str| format!("{n} {word}{}", if n == 1 { "" } else { "s" });
        format!(
            "{}, {}",
            plural(self.count(Severity::Error), "error"),
            plural(self.count(Severity::Warning), "warning")
        )
    }

    pub fn status(&self, strict: bool) -> ExitStatus {
        match (self.count(Severity::Error), self.count(Severity::Warning)) {
            (0, 0) => ExitStatus::Clean,
            (0, _) if !strict => ExitStatus::Warnings,
            _ => ExitStatus::Errors,
        }
    }
}
