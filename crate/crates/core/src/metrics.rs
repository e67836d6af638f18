//! Project richness and template adoption metrics.
//!
//! Retention is the share of template snippets found in the final project,
//! `|X ∩ Y| / |X|`; expansion is the share of the final project that did not
//! come from the template, `(|Y| - |X ∩ Y|) / |Y|`. Both are computed over
//! multisets, so a block duplicated in the template must be duplicated in the
//! final project to count twice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sb3::{Block, Project, Target};

/// Sprites plus backdrops.
pub fn visual_element_count(project: &Project) -> usize {
    let sprites = project.sprites().count();
    let backdrops = project.stage().map_or(0, |s| s.costumes.len());
    sprites + backdrops
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnippetMode {
    /// Identity is the opcode alone.
    #[default]
    Opcode,
    /// Opcode plus the selected field values of the block and its menus.
    Strict,
}

impl std::str::FromStr for SnippetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "opcode" => Ok(SnippetMode::Opcode),
            "strict" => Ok(SnippetMode::Strict),
            other => Err(format!("unknown snippet mode `{other}` (expected opcode or strict)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SnippetSource {
    Template,
    Final,
}

/// Multiset of block identities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnippetSet {
    pub counts: BTreeMap<String, usize>,
    pub source: SnippetSource,
}

impl SnippetSet {
    pub fn new(source: SnippetSource) -> Self {
        SnippetSet { counts: BTreeMap::new(), source }
    }

    pub fn from_counts<K: Into<String>>(source: SnippetSource, counts: impl IntoIterator<Item = (K, usize)>) -> Self {
        let mut set = SnippetSet::new(source);
        for (k, n) in counts {
            set.add_n(k, n);
        }
        set
    }

    pub fn add(&mut self, key: impl Into<String>) {
        self.add_n(key, 1);
    }

    fn add_n(&mut self, key: impl Into<String>, n: usize) {
        if n > 0 {
            *self.counts.entry(key.into()).or_insert(0) += n;
        }
    }

    pub fn size(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, key: &str) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// `Σ_k min(self_k, other_k)`.
    pub fn intersection_size(&self, other: &SnippetSet) -> usize {
        self.counts.iter().map(|(k, &n)| n.min(other.count(k))).sum()
    }

    /// Every key occurs in `other` at least as often as here.
    pub fn is_contained_in(&self, other: &SnippetSet) -> bool {
        self.counts.iter().all(|(k, &n)| other.count(k) >= n)
    }
}

fn snippet_key(target: &Target, block: &Block, mode: SnippetMode) -> String {
    match mode {
        SnippetMode::Opcode => block.opcode.clone(),
        SnippetMode::Strict => {
            let mut parts: Vec<String> = block
                .fields
                .iter()
                .map(|(name, f)| format!("{name}={}", f.text()))
                .collect();
            for (slot, input) in &block.inputs {
                for menu in input.block_refs().filter_map(|id| target.blocks.get(id)).filter(|b| b.shadow) {
                    parts.extend(menu.fields.iter().map(|(name, f)| format!("{slot}.{name}={}", f.text())));
                }
            }
            if parts.is_empty() {
                block.opcode.clone()
            } else {
                format!("{}[{}]", block.opcode, parts.join(","))
            }
        }
    }
}

/// Multiset over all non-shadow blocks of every target.
pub fn snippet_multiset(project: &Project, source: SnippetSource, mode: SnippetMode) -> SnippetSet {
    let mut set = SnippetSet::new(source);
    for target in &project.targets {
        for block in target.blocks.values().filter(|b| !b.shadow) {
            set.add(snippet_key(target, block, mode));
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("template snippet set is empty, retention is undefined")]
    EmptyTemplate,
    #[error("final snippet set is empty, expansion is undefined")]
    EmptyFinal,
}

pub fn retention(x: &SnippetSet, y: &SnippetSet) -> Result<f64, MetricsError> {
    let size = x.size();
    if size == 0 {
        return Err(MetricsError::EmptyTemplate);
    }
    Ok(x.intersection_size(y) as f64 / size as f64)
}

pub fn expansion(x: &SnippetSet, y: &SnippetSet) -> Result<f64, MetricsError> {
    let size = y.size();
    if size == 0 {
        return Err(MetricsError::EmptyFinal);
    }
    Ok((size - x.intersection_size(y)) as f64 / size as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionReport {
    pub retention: f64,
    pub expansion: f64,
    pub intersection_size: usize,
    pub x_size: usize,
    pub y_size: usize,
    pub mode: SnippetMode,
}

impl AdoptionReport {
    pub fn compute(x: &SnippetSet, y: &SnippetSet, mode: SnippetMode) -> Result<Self, MetricsError> {
        Ok(AdoptionReport {
            retention: retention(x, y)?,
            expansion: expansion(x, y)?,
            intersection_size: x.intersection_size(y),
            x_size: x.size(),
            y_size: y.size(),
            mode,
        })
    }

    pub fn from_projects(template: &Project, final_project: &Project, mode: SnippetMode) -> Result<Self, MetricsError> {
        let x = snippet_multiset(template, SnippetSource::Template, mode);
        let y = snippet_multiset(final_project, SnippetSource::Final, mode);
        Self::compute(&x, &y, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(source: SnippetSource, keys: &[&str]) -> SnippetSet {
        let mut s = SnippetSet::new(source);
        keys.iter().for_each(|k| s.add(*k));
        s
    }

    #[test]
    fn formula_examples() {
        let x = set(SnippetSource::Template, &["a", "b", "c", "d"]);
        let y = set(SnippetSource::Final, &["a", "b", "c", "e", "f", "g"]);
        assert_eq!(retention(&x, &y), Ok(0.75));
        assert_eq!(expansion(&x, &y), Ok(0.5));
        assert_eq!(retention(&x, &x), Ok(1.0));
        assert_eq!(expansion(&x, &x), Ok(0.0));
        let z = set(SnippetSource::Final, &["q", "r"]);
        assert_eq!(expansion(&x, &z), Ok(1.0));
    }

    #[test]
    fn multiset_min() {
        let x = SnippetSet::from_counts(SnippetSource::Template, [("a", 2)]);
        let y = SnippetSet::from_counts(SnippetSource::Final, [("a", 1)]);
        assert_eq!(retention(&x, &y), Ok(0.5));
    }

    #[test]
    fn undefined_cases_are_errors() {
        let empty = SnippetSet::new(SnippetSource::Template);
        let y = set(SnippetSource::Final, &["a"]);
        assert_eq!(retention(&empty, &y), Err(MetricsError::EmptyTemplate));
        assert_eq!(expansion(&y, &SnippetSet::new(SnippetSource::Final)), Err(MetricsError::EmptyFinal));
    }

    #[test]
    fn element_count() {
        let mut stage = Target::new_stage();
        stage.costumes = vec![serde_json::json!({"name": "a"}), serde_json::json!({"name": "b"})];
        let project = Project {
            targets: vec![stage, Target::new_sprite("A"), Target::new_sprite("B"), Target::new_sprite("C")],
            ..Default::default()
        };
        assert_eq!(visual_element_count(&project), 5);
    }
}
