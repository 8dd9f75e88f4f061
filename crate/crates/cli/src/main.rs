use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idss_core::ceu::{CompileOptions, ErrorMomentPolicy};
use idss_core::evaluate::MomentClosure;
use idss_core::model::{parse_model, DiagnosticKind};
use idss_core::pipeline::{validate_document, Compiled, ErrorKind, IdssError};
use idss_core::poly::VertexId;
use idss_core::report::{render, AdequacyView, Format, PathsReport, Report, ScoreDocument, ValidationReport};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "idss", version, about = "Symbolic expected utility for integrating decision support systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model document; prints nothing when it is valid.
    Validate(Common),
    /// Rooted paths and path expansion of each vertex.
    Paths {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        vertex: Option<u32>,
    },
    /// Conditional expected utility as a polynomial in panel parameters.
    Compile {
        #[command(flatten)]
        compile: CompileArgs,
        /// Numeric CEU of one policy instead of the symbolic form.
        #[arg(long)]
        policy: Option<String>,
        /// Attach the contributing path tuples to every monomial.
        #[arg(long)]
        provenance: bool,
    },
    /// Cross-panel moment independences the CEU relies on.
    Independences(CompileArgs),
    /// Within-panel expectations each panel must deliver.
    Summaries(CompileArgs),
    /// Expected utility of every policy.
    Score(ScoreArgs),
    /// Policies ordered by expected utility.
    Rank(ScoreArgs),
    /// Monte Carlo estimate of expected utility by forward simulation.
    Oracle {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(long)]
        moments: Option<PathBuf>,
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Start the HTTP service (IDSS_BIND, IDSS_SESSION_TTL_SECS, IDSS_MAX_BODY_BYTES).
    Serve {
        #[arg(long)]
        bind: Option<std::net::SocketAddr>,
    },
}

#[derive(Debug, Args)]
struct Common {
    model: PathBuf,
    #[arg(long, default_value = "table")]
    format: Format,
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[command(flatten)]
    common: Common,
    /// Utility class; defaults to the first one in the document.
    #[arg(long)]
    utility: Option<String>,
    #[arg(long = "error-moments", default_value = "truncate")]
    errors: ErrorMomentPolicy,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    compile: CompileArgs,
    #[arg(long, default_value = "gaussian")]
    closure: MomentClosure,
    /// Moments document merged over the model's own table.
    #[arg(long)]
    moments: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Idss(#[from] IdssError),
    #[error("invalid model")]
    Invalid(ErrorKind),
    #[error("service: {0}")]
    Service(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let kind = match self {
            CliError::Io { .. } | CliError::Service(_) => return 3,
            CliError::Json { .. } => ErrorKind::Schema,
            CliError::Idss(e) => e.kind(),
            CliError::Invalid(k) => *k,
        };
        match kind {
            ErrorKind::Schema => 4,
            ErrorKind::Cycle => 5,
            ErrorKind::Ownership => 6,
            ErrorKind::MissingValue => 7,
            ErrorKind::Unknown => 8,
            ErrorKind::NotLinear => 9,
            ErrorKind::MissingSummary => 10,
            ErrorKind::NegativeVariance => 11,
            ErrorKind::OracleUnsupported => 12,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn compiled(args: &CompileArgs, provenance: bool) -> Result<Compiled, CliError> {
    let text = read(&args.common.model)?;
    let options = CompileOptions { errors: args.errors, provenance };
    Ok(Compiled::from_json(&text, args.utility.as_deref(), options)?)
}

fn scored(args: &ScoreArgs) -> Result<ScoreDocument, CliError> {
    let c = compiled(&args.compile, false)?;
    let overrides = args.moments.as_deref().map(read_json).transpose()?;
    let moments = c.moments(overrides.as_ref())?;
    Ok(c.score(&moments, args.closure)?)
}

fn rank_table(doc: &ScoreDocument) -> String {
    let mut out = String::new();
    for (n, id) in doc.board.ranking.iter().enumerate() {
        let eu = doc.board.eu(id).unwrap_or(f64::NAN);
        let _ = writeln!(out, "{}. {id}  {eu:.10}", n + 1);
    }
    for group in &doc.board.ties {
        let _ = writeln!(out, "tie: {}", group.join(" = "));
    }
    out
}

fn diagnostic_kind(kind: DiagnosticKind) -> ErrorKind {
    match kind {
        DiagnosticKind::Schema => ErrorKind::Schema,
        DiagnosticKind::Cycle => ErrorKind::Cycle,
        DiagnosticKind::Ownership => ErrorKind::Ownership,
        DiagnosticKind::MissingValue => ErrorKind::MissingValue,
    }
}

/// Report text for stdout, plus the error to exit with after printing it.
fn run(command: Command) -> Result<(String, Option<CliError>), CliError> {
    let out = match command {
        Command::Validate(common) => {
            let report = ValidationReport::new(validate_document(&read(&common.model)?));
            let failure = report.diagnostics.first().map(|d| CliError::Invalid(diagnostic_kind(d.kind)));
            return Ok((render(&report, common.format), failure));
        }
        Command::Paths { common, vertex } => {
            let model = parse_model(&read(&common.model)?).map_err(IdssError::from)?;
            let report = PathsReport::new(&model, vertex.map(VertexId)).map_err(IdssError::from)?;
            render(&report, common.format)
        }
        Command::Compile { compile, policy, provenance } => {
            let c = compiled(&compile, provenance)?;
            render(&c.ceu(policy.as_deref())?, compile.common.format)
        }
        Command::Independences(args) => {
            render(&compiled(&args, false)?.adequacy(AdequacyView::Conditions), args.common.format)
        }
        Command::Summaries(args) => {
            render(&compiled(&args, false)?.adequacy(AdequacyView::Summaries), args.common.format)
        }
        Command::Score(args) => render(&scored(&args)?, args.compile.common.format),
        Command::Rank(args) => {
            let doc = scored(&args)?;
            match args.compile.common.format {
                Format::Table => rank_table(&doc),
                Format::Json => doc.json(),
            }
        }
        Command::Oracle { compile, moments, policy, samples, seed } => {
            let c = compiled(&compile, false)?;
            let overrides = moments.as_deref().map(read_json).transpose()?;
            let table = c.moments(overrides.as_ref())?;
            render(&c.oracle(&table, policy.as_deref(), samples, seed)?, compile.common.format)
        }
        Command::Serve { bind } => {
            let mut config = idss_service::Config::from_env().map_err(|e| CliError::Service(e.to_string()))?;
            if let Some(b) = bind {
                config.bind = b;
            }
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Service(e.to_string()))?;
            eprintln!("listening on {}", config.bind);
            runtime.block_on(idss_service::serve(config)).map_err(|e| CliError::Service(e.to_string()))?;
            String::new()
        }
    };
    Ok((out, None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((out, failure)) => {
            print!("{out}");
            match failure {
                Some(e) => ExitCode::from(e.exit_code()),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
