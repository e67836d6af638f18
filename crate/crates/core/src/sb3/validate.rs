use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{Project, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    /// The project does not have exactly one stage.
    StageCount,
    StageNotFirst,
    StageName,
    /// `next`, `parent` or an input names a block that does not exist.
    DanglingReference,
    /// `B.next = C` but `C.parent != B`.
    ChainMismatch,
    /// An input of `B` holds non-shadow block `C` but `C.parent != B`.
    InputParentMismatch,
    /// `B.parent = P` but `P` does not reference `B`.
    ParentMismatch,
    /// `parent == null` disagrees with the `topLevel` flag.
    TopLevelFlagMismatch,
    MissingCoordinates,
    ShadowTopLevel,
    /// Input slot names are uppercase identifiers.
    SlotName,
    /// A non-shadow block that no top-level script reaches (e.g. a cycle).
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub target: Option<String>,
    pub block: Option<String>,
    /// The missing ID for [`Rule::DanglingReference`].
    pub reference: Option<String>,
    pub detail: String,
}

impl Violation {
    fn new(rule: Rule, target: &Target, block: &str, detail: impl Into<String>) -> Self {
        Violation {
            rule,
            target: Some(target.name.clone()),
            block: Some(block.to_string()),
            reference: None,
            detail: detail.into(),
        }
    }

    fn project(rule: Rule, detail: impl Into<String>) -> Self {
        Violation { rule, target: None, block: None, reference: None, detail: detail.into() }
    }

    /// The block ID to report for this violation: the missing reference for
    /// dangling IDs, otherwise the block the rule fired on.
    pub fn offending_id(&self) -> &str {
        self.reference
            .as_deref()
            .or(self.block.as_deref())
            .or(self.target.as_deref())
            .unwrap_or("")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rule)?;
        if let Some(t) = &self.target {
            write!(f, " in target `{t}`")?;
        }
        if let Some(b) = &self.block {
            write!(f, " at block `{b}`")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks every model invariant. Returns an empty list iff the project is valid.
pub fn validate(project: &Project) -> Vec<Violation> {
    let mut out = Vec::new();
    let stages: Vec<usize> = project
        .targets
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_stage)
        .map(|(i, _)| i)
        .collect();
    if stages.len() != 1 {
        out.push(Violation::project(Rule::StageCount, format!("found {} stage targets", stages.len())));
    }
    if let Some(&first) = stages.first() {
        if first != 0 {
            out.push(Violation::project(Rule::StageNotFirst, format!("stage is target #{first}")));
        }
    }
    for target in &project.targets {
        if target.is_stage && target.name != "Stage" {
            out.push(Violation {
                target: Some(target.name.clone()),
                ..Violation::project(Rule::StageName, "stage must be named \"Stage\"")
            });
        }
        validate_target(target, &mut out);
    }
    out
}

fn is_custom_block(opcode: &str) -> bool {
    opcode.starts_with("procedures_")
}

fn valid_slot_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn validate_target(target: &Target, out: &mut Vec<Violation>) {
    let dangling = |block: &str, what: &str, reference: &str| Violation {
        reference: Some(reference.to_string()),
        ..Violation::new(Rule::DanglingReference, target, block, format!("{what} `{reference}` does not exist"))
    };

    for (id, block) in &target.blocks {
        if let Some(next) = &block.next {
            match target.blocks.get(next) {
                None if !target.primitives.contains_key(next) => out.push(dangling(id, "next", next)),
                Some(child) if child.parent.as_deref() != Some(id.as_str()) => out.push(Violation::new(
                    Rule::ChainMismatch,
                    target,
                    next,
                    format!("`{id}`.next is `{next}` but its parent is {:?}", child.parent),
                )),
                _ => {}
            }
        }
        if let Some(parent) = &block.parent {
            match target.blocks.get(parent) {
                None => out.push(dangling(id, "parent", parent)),
                Some(p) if !block.shadow && !p.children().any(|c| c == id) => out.push(Violation::new(
                    Rule::ParentMismatch,
                    target,
                    id,
                    format!("parent `{parent}` does not reference this block"),
                )),
                _ => {}
            }
        }
        for (slot, input) in &block.inputs {
            if !is_custom_block(&block.opcode) && !valid_slot_name(slot) {
                out.push(Violation::new(Rule::SlotName, target, id, format!("input `{slot}` is not an uppercase identifier")));
            }
            for child_id in input.block_refs() {
                match target.blocks.get(child_id) {
                    None if !target.primitives.contains_key(child_id) => {
                        out.push(dangling(id, &format!("input {slot}"), child_id))
                    }
                    Some(child) if !child.shadow && child.parent.as_deref() != Some(id.as_str()) => {
                        out.push(Violation::new(
                            Rule::InputParentMismatch,
                            target,
                            child_id,
                            format!("held by input {slot} of `{id}` but its parent is {:?}", child.parent),
                        ))
                    }
                    _ => {}
                }
            }
        }
        if block.parent.is_none() != block.top_level {
            out.push(Violation::new(
                Rule::TopLevelFlagMismatch,
                target,
                id,
                format!("parent is {:?} but topLevel is {}", block.parent, block.top_level),
            ));
        }
        if block.top_level && (block.x.is_none() || block.y.is_none()) {
            out.push(Violation::new(Rule::MissingCoordinates, target, id, "top-level block without x/y"));
        }
        if block.shadow && block.top_level {
            out.push(Violation::new(Rule::ShadowTopLevel, target, id, "shadow block marked top-level"));
        }
    }

    let mut reached = BTreeSet::new();
    let mut stack: Vec<&str> = target
        .blocks
        .iter()
        .filter(|(_, b)| (b.top_level || b.parent.is_none()) && !b.shadow)
        .map(|(id, _)| id.as_str())
        .collect();
    while let Some(id) = stack.pop() {
        if !reached.insert(id) {
            continue;
        }
        if let Some(block) = target.blocks.get(id) {
            stack.extend(block.children());
        }
    }
    for (id, block) in &target.blocks {
        if !block.shadow && !reached.contains(id.as_str()) {
            out.push(Violation::new(Rule::Unreachable, target, id, "not reachable from any top-level block"));
        }
    }
}
