use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::corpus::{Example, ExampleCorpus};
use super::AssistError;

pub const COT_INSTRUCTION: &str = "Solve a question-answering task with interleaving Thought. First, please select the answer from the Scratch 3.0 categories below Motion, Looks, Sound, Events, Control, Sensing, Operators, and Variables. Second, please provide your answer based on the Scratch Wiki Blocks.";

pub const DEFAULT_K: usize = 10;
pub const CONTEXT_LIMIT: usize = 8196;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionPolicy {
    /// Rank by word-set Jaccard overlap with the question.
    #[default]
    Similarity,
    /// First `k` examples in corpus order.
    Fixed,
}

impl std::str::FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "similarity" => Ok(SelectionPolicy::Similarity),
            "fixed" => Ok(SelectionPolicy::Fixed),
            other => Err(format!("unknown selection policy `{other}` (expected similarity or fixed)")),
        }
    }
}

/// Lowercased alphanumeric words; apostrophes stay inside words.
pub fn word_set(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

pub fn select_examples<'c>(
    question: &str,
    corpus: &'c ExampleCorpus,
    k: usize,
    policy: SelectionPolicy,
) -> Result<Vec<&'c Example>, AssistError> {
    if corpus.is_empty() {
        return Err(AssistError::EmptyCorpus);
    }
    if k == 0 || k > corpus.len() {
        return Err(AssistError::InvalidK { k, corpus_size: corpus.len() });
    }
    let mut ranked: Vec<(usize, &Example)> = corpus.examples.iter().enumerate().collect();
    if policy == SelectionPolicy::Similarity {
        let query = word_set(question);
        let scores: Vec<f64> = ranked.iter().map(|(_, e)| jaccard(&query, &word_set(&e.question))).collect();
        // Stable sort keeps corpus order among equal scores.
        ranked.sort_by(|(i, _), (j, _)| scores[*j].total_cmp(&scores[*i]));
    }
    Ok(ranked.into_iter().take(k).map(|(_, e)| e).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptBundle {
    pub cot_instruction: String,
    pub shots: Vec<Example>,
    pub question: String,
    pub k: usize,
}

impl PromptBundle {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.cot_instruction);
        out.push_str("\n\nHere are some examples.\n");
        for shot in &self.shots {
            out.push_str("Question: ");
            out.push_str(&shot.question);
            out.push_str("\nAnswer: ");
            out.push_str(&shot.render_answer());
            out.push('\n');
        }
        out.push_str("Question: ");
        out.push_str(&self.question);
        out
    }

    pub fn token_estimate(&self) -> usize {
        estimate_tokens(&self.render())
    }
}

/// Whitespace-separated words times 1.4, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    let words = text.split_whitespace().count();
    (words * 14).div_ceil(10)
}

pub fn build_prompt(
    question: &str,
    corpus: &ExampleCorpus,
    k: usize,
    policy: SelectionPolicy,
) -> Result<PromptBundle, AssistError> {
    let question = question.trim();
    if question.is_empty() {
        return Err(AssistError::EmptyQuestion);
    }
    let shots = select_examples(question, corpus, k, policy)?.into_iter().cloned().collect();
    Ok(PromptBundle { cot_instruction: COT_INSTRUCTION.to_string(), shots, question: question.to_string(), k })
}
