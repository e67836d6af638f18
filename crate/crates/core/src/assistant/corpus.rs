use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Published worked exchange, stored verbatim.
    Published,
    /// Written for this corpus from a Scratch-cards starter task.
    Authored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub question: String,
    /// The "First, ..." part of the answer, up to the block array.
    pub rationale: String,
    pub blocks: Vec<String>,
    pub provenance: Provenance,
    /// Verbatim answer text, when the example has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
}

impl Example {
    /// Answer text as it appears in a prompt.
    pub fn render_answer(&self) -> String {
        match &self.answer {
            Some(answer) => answer.clone(),
            None => format!("{} {}", self.rationale.trim_end(), render_block_array(&self.blocks)),
        }
    }
}

/// `["a", "b"]`, strings written as-is.
pub fn render_block_array(blocks: &[String]) -> String {
    let items: Vec<String> = blocks.iter().map(|b| format!("\"{b}\"")).collect();
    format!("[{}]", items.join(", "))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExampleCorpus {
    pub examples: Vec<Example>,
}

impl ExampleCorpus {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(ExampleCorpus { examples: serde_json::from_str(text)? })
    }

    /// The shipped 15-example corpus.
    pub fn builtin() -> &'static ExampleCorpus {
        static CORPUS: OnceLock<ExampleCorpus> = OnceLock::new();
        CORPUS.get_or_init(|| ExampleCorpus::from_json(BUILTIN_SOURCE).expect("shipped corpus parses"))
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

pub const BUILTIN_SOURCE: &str = include_str!("../../data/corpus.json");
