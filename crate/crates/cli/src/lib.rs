//! Command-line front end and HTTP query service for a mediacube catalog.
//!
//! Exit codes: 0 on success, 1 on domain errors (stderr names the error
//! case), 2 on usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use mediacube::analytics::{
    self, cube_query, CubeQuery, Dimension, DimensionFilter, Granularity, TimeFilter,
};
use mediacube::federation::{FieldMapping, SourceDescriptor, SourceKind};
use mediacube::json::canonical_json;
use mediacube::{
    Catalog, ContextLabel, DocumentCode, NewUsage, Timestamp, UseType, UserId, UserProfile,
};

pub mod report;
pub mod service;

/// Environment variable naming the catalog file when `--catalog` is absent.
pub const CATALOG_ENV: &str = "MEDIACUBE_CATALOG";

#[derive(Debug, Parser)]
#[command(
    name = "mediacube",
    version,
    about = "Federated multimedia metadata catalog"
)]
pub struct Cli {
    /// Catalog file (JSON Lines); created on first write.
    #[arg(long, global = true, env = CATALOG_ENV, value_name = "PATH")]
    pub catalog: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register an origin source and its field mapping.
    SourceRegister {
        #[arg(long)]
        id: String,
        #[arg(long, value_parser = parse_kind)]
        kind: SourceKind,
        /// Path (tabular, file-tree) or tcp://host:port (remote-line).
        #[arg(long)]
        location: String,
        /// JSON file holding the field mapping.
        #[arg(long, value_name = "FILE")]
        mapping: PathBuf,
        /// Register without enabling harvest.
        #[arg(long)]
        disabled: bool,
    },
    /// Harvest a source and store its mapped records.
    Ingest { source_id: String },
    /// Print a generic record.
    RecordGet {
        #[arg(value_parser = parse_code)]
        code: DocumentCode,
    },
    /// Fetch the full record from its origin source.
    Resolve {
        #[arg(value_parser = parse_code)]
        code: DocumentCode,
    },
    /// Register or replace a user profile.
    UserRegister {
        #[arg(long)]
        id: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        address: Option<String>,
        #[arg(long)]
        social_class: Option<String>,
    },
    /// Append a usage event.
    UsageLog {
        #[arg(long, value_parser = parse_code)]
        doc: DocumentCode,
        #[arg(long, value_parser = parse_context)]
        context: ContextLabel,
        #[arg(long, value_parser = parse_user)]
        user: UserId,
        #[arg(long = "type", value_enum)]
        use_type: UseTypeArg,
        /// Event time, YYYY-MM-DDThh:mm:ssZ (default: now).
        #[arg(long, value_parser = parse_timestamp)]
        at: Option<Timestamp>,
    },
    /// List usage contexts, static first.
    Contexts,
    /// Query the usage cube.
    Cube {
        /// Fix a dimension: doc=CODE, context=LABEL, user=ID,
        /// time=YYYY-MM-DD or time=START/END (YYYY-MM-DDThh:mm:ssZ each).
        #[arg(long = "fix", value_name = "DIM=VALUE", value_parser = parse_fix)]
        fix: Vec<Fix>,
        #[arg(long, value_parser = parse_granularity, default_value = "day")]
        granularity: Granularity,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Fixed analytical reports.
    Report {
        #[command(subcommand)]
        report: ReportKind,
    },
    /// Write the catalog canonically to a file.
    Save {
        #[arg(long)]
        to: PathBuf,
    },
    /// Validate a catalog file and install it as the current catalog.
    Load {
        #[arg(long)]
        from: PathBuf,
    },
    /// Serve the HTTP query API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportKind {
    /// Documents ranked by number of uses.
    Importance,
    /// One user's uses by context and by document.
    Interest {
        #[arg(long, value_parser = parse_user)]
        user: UserId,
    },
    /// Uses per time bucket.
    Evolution {
        #[arg(long, value_parser = parse_granularity, default_value = "day")]
        granularity: Granularity,
    },
    /// Repetitive versus occasional uses.
    UsageTypes,
    /// Uses by social class and context.
    SocialClasses,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UseTypeArg {
    Repetitive,
    Occasional,
}

impl From<UseTypeArg> for UseType {
    fn from(a: UseTypeArg) -> Self {
        match a {
            UseTypeArg::Repetitive => UseType::Repetitive,
            UseTypeArg::Occasional => UseType::Occasional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

/// One `--fix` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fix {
    Doc(DocumentCode),
    Context(ContextLabel),
    User(UserId),
    Time(TimeFilter),
}

impl Fix {
    fn dimension(&self) -> Dimension {
        match self {
            Fix::Doc(_) => Dimension::Document,
            Fix::Context(_) => Dimension::Context,
            Fix::User(_) => Dimension::User,
            Fix::Time(_) => Dimension::Time,
        }
    }
}

fn parse_kind(s: &str) -> Result<SourceKind, String> {
    s.parse()
}

fn parse_code(s: &str) -> Result<DocumentCode, String> {
    s.parse()
        .map_err(|e: mediacube::MalformedCode| e.to_string())
}

fn parse_context(s: &str) -> Result<ContextLabel, String> {
    ContextLabel::new(s).map_err(|e| e.to_string())
}

fn parse_user(s: &str) -> Result<UserId, String> {
    UserId::new(s).map_err(|e| e.to_string())
}

fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    s.parse()
        .map_err(|e: mediacube::ids::IdError| e.to_string())
}

fn parse_granularity(s: &str) -> Result<Granularity, String> {
    s.parse()
}

/// Parse `dim=value` for `--fix`.
pub fn parse_fix(s: &str) -> Result<Fix, String> {
    let (dim, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected DIM=VALUE, got {s:?}"))?;
    Ok(match dim.parse::<Dimension>()? {
        Dimension::Document => Fix::Doc(parse_code(value)?),
        Dimension::Context => Fix::Context(parse_context(value)?),
        Dimension::User => Fix::User(parse_user(value)?),
        Dimension::Time => Fix::Time(
            value
                .parse()
                .map_err(|e: analytics::TimeSyntaxError| e.to_string())?,
        ),
    })
}

/// Turn the `--fix` list into a filter; each dimension may be fixed once.
pub fn filter_from_fixes(fixes: &[Fix]) -> Result<DimensionFilter, String> {
    let mut f = DimensionFilter::default();
    for fix in fixes {
        if f.is_fixed(fix.dimension()) {
            return Err(format!(
                "dimension {} fixed more than once",
                fix.dimension()
            ));
        }
        match fix.clone() {
            Fix::Doc(d) => f.document = Some(d),
            Fix::Context(c) => f.context = Some(c),
            Fix::User(u) => f.user = Some(u),
            Fix::Time(t) => f.time = Some(t),
        }
    }
    Ok(f)
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn domain(err: impl std::fmt::Display) -> Self {
        Self {
            code: 1,
            stdout: String::new(),
            stderr: format!("{err}\n"),
        }
    }

    fn usage(err: clap::Error) -> Self {
        let text = err.render().to_string();
        match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Self::ok(text),
            _ => {
                let mut stderr = text;
                if !stderr.contains("Usage:") {
                    let _ = write!(stderr, "\n{}\n", Cli::command().render_usage());
                }
                Self {
                    code: 2,
                    stdout: String::new(),
                    stderr,
                }
            }
        }
    }
}

/// Parse arguments (program name first) and execute.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => Outcome::usage(e),
    }
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> Outcome {
    Outcome::usage(Cli::command().error(kind, message))
}

fn open_catalog(path: &Path) -> Result<Catalog, mediacube::StoreError> {
    if path.exists() {
        Catalog::load(path)
    } else {
        Ok(Catalog::new())
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("values serialize to JSON");
    let mut s = canonical_json(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Execute a parsed invocation.
pub fn execute(cli: Cli) -> Outcome {
    let Some(path) = cli.catalog.clone() else {
        return usage_error(
            ErrorKind::MissingRequiredArgument,
            format!("no catalog given: pass --catalog PATH or set {CATALOG_ENV}"),
        );
    };
    if let Command::Load { from } = &cli.command {
        return match Catalog::load(from).and_then(|c| c.save(&path).map(|_| c)) {
            Ok(c) => Outcome::ok(format!(
                "loaded {} records, {} users, {} events\n",
                c.record_count(),
                c.user_count(),
                c.event_count()
            )),
            Err(e) => Outcome::domain(e),
        };
    }
    if let Command::Cube { fix, .. } = &cli.command {
        if let Err(message) = filter_from_fixes(fix) {
            return usage_error(ErrorKind::ArgumentConflict, message);
        }
    }
    let mut catalog = match open_catalog(&path) {
        Ok(c) => c,
        Err(e) => return Outcome::domain(e),
    };
    match dispatch(cli.command, &mut catalog, &path) {
        Ok(out) => out,
        Err(message) => Outcome::domain(message),
    }
}

fn persist(catalog: &Catalog, path: &Path) -> Result<(), String> {
    catalog.save(path).map_err(|e| e.to_string())
}

fn dispatch(command: Command, catalog: &mut Catalog, path: &Path) -> Result<Outcome, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match command {
        Command::SourceRegister {
            id,
            kind,
            location,
            mapping,
            disabled,
        } => {
            let text = std::fs::read_to_string(&mapping)
                .map_err(|e| format!("StorageIO: {}: {e}", mapping.display()))?;
            let mapping: FieldMapping = serde_json::from_str(&text)
                .map_err(|e| format!("InvalidMapping: {}: {e}", mapping.display()))?;
            let id = catalog
                .register_source(SourceDescriptor {
                    source_id: id,
                    kind,
                    location,
                    mapping,
                    enabled: !disabled,
                })
                .map_err(|e| err(&e))?;
            persist(catalog, path)?;
            Ok(Outcome::ok(format!("{id}\n")))
        }
        Command::Ingest { source_id } => {
            let report = catalog.ingest(&source_id).map_err(|e| err(&e))?;
            persist(catalog, path)?;
            let mut out = format!(
                "ingested\t{}\nerrors\t{}\n",
                report.ingested.len(),
                report.errors.len()
            );
            let mut stderr = String::new();
            for e in &report.errors {
                let _ = writeln!(stderr, "RecordError: {e}");
            }
            if report.ingested.is_empty() && report.errors.is_empty() {
                out.push_str("(source is empty)\n");
            }
            Ok(Outcome {
                code: 0,
                stdout: out,
                stderr,
            })
        }
        Command::RecordGet { code } => {
            let r = catalog.get_record(&code).map_err(|e| err(&e))?;
            Ok(Outcome::ok(to_json(r)))
        }
        Command::Resolve { code } => {
            let r = catalog.resolve(&code).map_err(|e| err(&e))?;
            Ok(Outcome::ok(to_json(&r)))
        }
        Command::UserRegister {
            id,
            name,
            address,
            social_class,
        } => {
            let mut p = UserProfile::new(id.clone(), name);
            p.address = address;
            p.social_class = social_class;
            catalog.register_user(p).map_err(|e| err(&e))?;
            persist(catalog, path)?;
            Ok(Outcome::ok(format!("{id}\n")))
        }
        Command::UsageLog {
            doc,
            context,
            user,
            use_type,
            at,
        } => {
            let id = catalog
                .record_usage(NewUsage {
                    document_code: doc,
                    context,
                    user_id: user,
                    timestamp: at.unwrap_or_else(Timestamp::now),
                    use_type: use_type.into(),
                })
                .map_err(|e| err(&e))?;
            persist(catalog, path)?;
            Ok(Outcome::ok(format!("{id}\n")))
        }
        Command::Contexts => {
            let mut out = String::from("label\torigin\tfirst_seen\n");
            for c in catalog.list_contexts() {
                let origin = serde_json::to_value(c.origin).expect("origin serializes");
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}",
                    c.label,
                    origin.as_str().unwrap_or_default(),
                    c.first_seen
                );
            }
            Ok(Outcome::ok(out))
        }
        Command::Cube {
            fix,
            granularity,
            format,
        } => {
            let fixed = filter_from_fixes(&fix)?;
            let q = CubeQuery { fixed, granularity };
            let r = cube_query(&catalog.snapshot(), &q).map_err(|e| err(&e))?;
            Ok(Outcome::ok(match format {
                Format::Tsv => r.to_tsv(),
                Format::Json => to_json(&r),
            }))
        }
        Command::Report { report } => report::render(&catalog.snapshot(), &report)
            .map(Outcome::ok)
            .map_err(|e| err(&e)),
        Command::Save { to } => {
            catalog.save(&to).map_err(|e| err(&e))?;
            Ok(Outcome::ok(format!("{}\n", to.display())))
        }
        Command::Load { .. } => unreachable!("handled before the catalog is opened"),
        Command::Serve { port, bind } => {
            let catalog = std::mem::take(catalog);
            match service::serve_blocking(catalog, path.to_path_buf(), &bind, port) {
                Ok(()) => Ok(Outcome::ok(String::new())),
                Err(e) => Err(format!("ServeFailed: {e}")),
            }
        }
    }
}
