//! Shared pieces of the `scratchkit` command and its HTTP service.
//!
//! Both front ends go through [`Engine`], so a project scored on the command
//! line and over HTTP produces the same bytes.

pub mod service;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use scratchkit::assistant::{
    AssistError, AssistResult, Assistant, CompletionTransport, ExampleCorpus, FixtureTransport, LiveTransport,
    SelectionPolicy, TransportError, CONTEXT_LIMIT, DEFAULT_K,
};
use scratchkit::catalog::{Catalog, CatalogError, DEFAULT_THRESHOLD};
use scratchkit::metrics::{AdoptionReport, MetricsError, SnippetMode};
use scratchkit::rubric::{score_project, MasteryBands, RubricReport};
use scratchkit::sb3::{load_project, Project, ProjectFormat, Sb3Error};

/// Exit codes of the command-line tool.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const METRIC_DOMAIN: u8 = 3;
    pub const ASSIST: u8 = 4;
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut text = scratchkit::canonical_json(value).expect("report types serialize");
    text.push('\n');
    text
}

/// Error shape shared by the CLI (stderr) and the service (response body).
#[derive(Debug)]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
    pub exit: u8,
    pub status: u16,
}

impl Failure {
    pub fn new(code: &'static str, message: impl Into<String>, exit: u8, status: u16) -> Self {
        Failure { code, message: message.into(), exit, status }
    }

    pub fn body(&self) -> String {
        render(&json!({"error": {"code": self.code, "message": self.message}}))
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<Sb3Error> for Failure {
    fn from(e: Sb3Error) -> Self {
        let code = match &e {
            Sb3Error::MalformedArchive(_) => "malformed_archive",
            Sb3Error::MalformedJson(_) => "malformed_json",
            Sb3Error::GraphInconsistency { .. } => "graph_inconsistency",
            Sb3Error::ValidationFailure(_) => "validation_failure",
            Sb3Error::Io(_) => "io",
        };
        Failure::new(code, e.to_string(), exit::PARSE, 400)
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        let code = match e {
            MetricsError::EmptyTemplate => "empty_template",
            MetricsError::EmptyFinal => "empty_final",
        };
        Failure::new(code, e.to_string(), exit::METRIC_DOMAIN, 422)
    }
}

impl From<AssistError> for Failure {
    fn from(e: AssistError) -> Self {
        let status = match &e {
            AssistError::Transport(_) => 502,
            AssistError::EmptyQuestion => 400,
            AssistError::InvalidK { .. } | AssistError::EmptyCorpus | AssistError::PromptTooLong { .. } => 500,
            _ => 422,
        };
        Failure::new(e.code(), e.to_string(), exit::ASSIST, status)
    }
}

/// Which completion transport to use.
#[derive(Debug, Clone)]
pub enum TransportMode {
    Fixture(PathBuf),
    Live,
}

/// Startup configuration. Everything here is read-only once built.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub k: usize,
    pub threshold: f64,
    pub policy: SelectionPolicy,
    pub mode: SnippetMode,
    pub transport: TransportMode,
    pub bands: MasteryBands,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            catalog: None,
            corpus: None,
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            policy: SelectionPolicy::Similarity,
            mode: SnippetMode::Opcode,
            transport: TransportMode::Live,
            bands: MasteryBands::default(),
        }
    }
}

/// Loaded catalog, corpus and transport.
#[derive(Clone)]
pub struct Engine {
    pub catalog: Arc<Catalog>,
    pub corpus: Arc<ExampleCorpus>,
    pub transport: Arc<dyn CompletionTransport>,
    pub config: RunConfig,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display()), exit::PARSE, 400))
}

impl Engine {
    pub fn new(config: RunConfig) -> Result<Self, Failure> {
        if config.k == 0 {
            return Err(Failure::new("config", "k must be at least 1", exit::FAILURE, 500));
        }
        if !(config.threshold > 0.0 && config.threshold <= 1.0) {
            return Err(Failure::new("config", "threshold must be in (0, 1]", exit::FAILURE, 500));
        }
        let catalog = match &config.catalog {
            Some(path) => Catalog::from_toml(&read_text(path)?)
                .map_err(|e: CatalogError| Failure::new("catalog", e.to_string(), exit::PARSE, 500))?,
            None => Catalog::builtin().clone(),
        };
        let corpus = match &config.corpus {
            Some(path) => ExampleCorpus::from_json(&read_text(path)?)
                .map_err(|e| Failure::new("corpus", e.to_string(), exit::PARSE, 500))?,
            None => ExampleCorpus::builtin().clone(),
        };
        let transport: Arc<dyn CompletionTransport> = match &config.transport {
            TransportMode::Fixture(path) => Arc::new(FixtureTransport::from_path(path).map_err(AssistError::from)?),
            TransportMode::Live => Arc::new(LiveTransport::from_env()),
        };
        Ok(Engine { catalog: Arc::new(catalog), corpus: Arc::new(corpus), transport, config })
    }

    pub fn assistant(&self) -> Assistant<'_> {
        Assistant {
            corpus: &self.corpus,
            catalog: &self.catalog,
            k: self.config.k,
            policy: self.config.policy,
            threshold: self.config.threshold,
            context_limit: CONTEXT_LIMIT,
        }
    }

    pub fn score(&self, bytes: &[u8]) -> Result<String, Failure> {
        let project = parse_project(bytes)?;
        Ok(render(&RubricReport::new(&score_project(&project), self.config.bands)))
    }

    pub fn metrics(&self, template: &[u8], final_project: &[u8], mode: SnippetMode) -> Result<String, Failure> {
        let template = parse_project(template)?;
        let final_project = parse_project(final_project)?;
        Ok(render(&AdoptionReport::from_projects(&template, &final_project, mode)?))
    }

    pub fn assist(&self, question: &str, project: Option<&Project>, target: &str) -> Result<AssistResult, Failure> {
        Ok(self.assistant().assist(question, self.transport.as_ref(), project, target)?)
    }
}

pub fn parse_project(bytes: &[u8]) -> Result<Project, Failure> {
    Ok(load_project(bytes, ProjectFormat::detect(bytes))?)
}

/// `dir/name.sb3` becomes `dir/name-<suffix>.sb3`.
pub fn sibling_path(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "project".into());
    input.with_file_name(format!("{stem}-{suffix}.sb3"))
}

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        AssistError::from(e).into()
    }
}
