//! Analysis and code assistance for Scratch 3.0 projects.
//!
//! - [`sb3`]: project model, `.sb3`/`project.json` codec and validation.
//! - [`catalog`]: block registry and fuzzy text-to-opcode matching.
//! - [`rubric`]: computational-thinking scoring over seven dimensions.
//! - [`metrics`]: visual element count, template retention and expansion.
//! - [`codegen`]: block-list compilation into scripts and project injection.
//! - [`assistant`]: prompt assembly, completion transports and answer parsing.

pub mod catalog;
pub mod sb3;
pub mod codegen;
pub mod metrics;
pub mod rubric;
pub mod assistant;

/// Pretty JSON with object keys sorted, for stable reports.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&serde_json::to_value(value)?)
}
