//! Few-shot prompting for block suggestions.
//!
//! A prompt is the category instruction, `k` worked examples and the child's
//! question. The reply is expected to name block categories ("First, ...")
//! and then list block texts as a JSON-like array ("Second, [...]"). The
//! array is compiled with [`crate::codegen`].
//!
//! ```
//! use scratchkit::assistant::{Assistant, FixtureTransport};
//!
//! let fixture = FixtureTransport::new([(
//!     "How do I hide?".to_string(),
//!     r#"First, use Looks. Second, ["hide"]"#.to_string(),
//! )]);
//! let result = Assistant::default().assist("How do I hide?", &fixture, None, "").unwrap();
//! assert_eq!(result.opcodes, ["event_whenflagclicked", "looks_hide"]);
//! ```

mod answer;
mod corpus;
mod prompt;
mod transport;

use serde::Serialize;

use crate::catalog::{Catalog, Category, DEFAULT_THRESHOLD};
use crate::codegen::{self, CodegenError, InjectError, TemplatePatch};
use crate::sb3::Project;

pub use answer::{categories_in, parse_answer, AssistantAnswer};
pub use corpus::{render_block_array, Example, ExampleCorpus, Provenance};
pub use prompt::{
    build_prompt, estimate_tokens, jaccard, select_examples, word_set, PromptBundle, SelectionPolicy, CONTEXT_LIMIT,
    COT_INSTRUCTION, DEFAULT_K,
};
pub use transport::{
    final_question, CompletionTransport, FixtureTransport, LiveTransport, TransportError, ENV_API_KEY, ENV_ENDPOINT,
    ENV_MODEL, ENV_TIMEOUT,
};

/// Appended to the prompt when the first reply has no block array.
pub const CORRECTIVE_INSTRUCTION: &str =
    "Your previous reply had no block list. Reply again and end with the blocks as a list of quoted strings, for example [\"when green flag clicked\", \"move [10] steps\"].";

#[derive(Debug, thiserror::Error)]
pub enum AssistError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("example corpus is empty")]
    EmptyCorpus,
    #[error("k = {k} is outside 1..={corpus_size}")]
    InvalidK { k: usize, corpus_size: usize },
    #[error("prompt needs about {estimate} tokens, limit is {limit}")]
    PromptTooLong { estimate: usize, limit: usize },
    #[error("transport failure ({}): {0}", .0.kind())]
    Transport(#[from] TransportError),
    #[error("no block array in the answer after {attempts} attempt(s)")]
    NoBlockArray { attempts: usize },
    #[error("the answer's block array is empty")]
    EmptyBlockArray,
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Inject(#[from] InjectError),
}

impl PartialEq for AssistError {
    fn eq(&self, other: &Self) -> bool {
        use AssistError::*;
        match (self, other) {
            (EmptyQuestion, EmptyQuestion) | (EmptyCorpus, EmptyCorpus) | (EmptyBlockArray, EmptyBlockArray) => true,
            (InvalidK { k: a, corpus_size: b }, InvalidK { k: c, corpus_size: d }) => a == c && b == d,
            (PromptTooLong { estimate: a, limit: b }, PromptTooLong { estimate: c, limit: d }) => a == c && b == d,
            (Transport(a), Transport(b)) => a == b,
            (NoBlockArray { attempts: a }, NoBlockArray { attempts: b }) => a == b,
            (Codegen(a), Codegen(b)) => a == b,
            _ => false,
        }
    }
}

impl AssistError {
    pub fn code(&self) -> &'static str {
        match self {
            AssistError::EmptyQuestion => "empty_question",
            AssistError::EmptyCorpus => "empty_corpus",
            AssistError::InvalidK { .. } => "invalid_k",
            AssistError::PromptTooLong { .. } => "prompt_too_long",
            AssistError::Transport(_) => "transport_failure",
            AssistError::NoBlockArray { .. } => "no_block_array",
            AssistError::EmptyBlockArray => "empty_block_array",
            AssistError::Codegen(CodegenError::NoMatch { .. }) => "no_match",
            AssistError::Codegen(_) => "codegen",
            AssistError::Inject(_) => "inject",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssistResult {
    pub answer: AssistantAnswer,
    pub categories: Vec<Category>,
    pub opcodes: Vec<String>,
    pub patch: TemplatePatch,
    pub project: Option<Project>,
    /// Transport calls made, 1 or 2.
    pub attempts: usize,
}

/// JSON shape shared by the CLI and the service.
#[derive(Debug, Serialize)]
pub struct AssistReport<'a> {
    pub rationale: &'a str,
    pub categories: Vec<&'static str>,
    pub blocks: &'a [String],
    pub opcodes: &'a [String],
    pub patch: serde_json::Value,
}

impl AssistResult {
    pub fn report(&self) -> AssistReport<'_> {
        AssistReport {
            rationale: &self.answer.rationale,
            categories: self.categories.iter().map(|c| c.name()).collect(),
            blocks: &self.answer.blocks,
            opcodes: &self.opcodes,
            patch: self.patch.to_json(),
        }
    }
}

/// Shared, immutable assistant configuration.
#[derive(Debug, Clone)]
pub struct Assistant<'a> {
    pub corpus: &'a ExampleCorpus,
    pub catalog: &'a Catalog,
    pub k: usize,
    pub policy: SelectionPolicy,
    pub threshold: f64,
    pub context_limit: usize,
}

impl Default for Assistant<'static> {
    fn default() -> Self {
        Assistant {
            corpus: ExampleCorpus::builtin(),
            catalog: Catalog::builtin(),
            k: DEFAULT_K,
            policy: SelectionPolicy::default(),
            threshold: DEFAULT_THRESHOLD,
            context_limit: CONTEXT_LIMIT,
        }
    }
}

impl Assistant<'_> {
    pub fn prompt(&self, question: &str) -> Result<PromptBundle, AssistError> {
        let bundle = build_prompt(question, self.corpus, self.k, self.policy)?;
        let estimate = bundle.token_estimate();
        if estimate > self.context_limit {
            return Err(AssistError::PromptTooLong { estimate, limit: self.context_limit });
        }
        Ok(bundle)
    }

    /// Asks the transport, retrying once with a corrective instruction when
    /// the reply has no block array.
    pub fn ask(&self, question: &str, transport: &dyn CompletionTransport) -> Result<(AssistantAnswer, usize), AssistError> {
        let prompt = self.prompt(question)?.render();
        match parse_answer(&transport.complete(&prompt)?) {
            Err(AssistError::NoBlockArray { .. }) => {}
            other => return other.map(|a| (a, 1)),
        }
        tracing::warn!("answer had no block array, retrying once");
        let retry = format!("{prompt}\n{CORRECTIVE_INSTRUCTION}");
        match parse_answer(&transport.complete(&retry)?) {
            Err(AssistError::NoBlockArray { .. }) => Err(AssistError::NoBlockArray { attempts: 2 }),
            other => other.map(|a| (a, 2)),
        }
    }

    /// Full pipeline: prompt, transport, answer parsing, compilation and,
    /// when a project is given, injection into `target` ("" = first sprite).
    pub fn assist(
        &self,
        question: &str,
        transport: &dyn CompletionTransport,
        project: Option<&Project>,
        target: &str,
    ) -> Result<AssistResult, AssistError> {
        let (answer, attempts) = self.ask(question, transport)?;
        let plan = codegen::parse_block_list_with(&answer.blocks, self.catalog, self.threshold)?;
        let patch = codegen::emit_script(&plan, None).with_target(target);
        let project = project.map(|p| codegen::inject(p, &patch)).transpose()?;
        Ok(AssistResult {
            categories: categories_in(&answer.rationale).into_iter().collect(),
            opcodes: plan.opcodes(),
            answer,
            patch,
            project,
            attempts,
        })
    }
}
