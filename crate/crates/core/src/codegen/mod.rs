//! Turns an ordered list of block descriptions into a Scratch script.
//!
//! The list has the shape of an assistant answer, e.g.
//! `["when sprite clicked", "forever", "move [10] steps"]`. Each text is
//! matched against the catalog; bracketed segments become arguments. A
//! c-block absorbs every following text until the end of the list or an
//! `end` sentinel, and `else` switches an `if` into its second branch. If the
//! list does not start with a hat, `when green flag clicked` is prepended.

mod emit;
mod inject;
mod parse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog::{Catalog, CatalogEntry, DEFAULT_THRESHOLD};
use crate::sb3::{Block, Project, Sb3Error, Violation};

pub use inject::COLUMN_WIDTH;

#[derive(Debug, Clone, PartialEq)]
pub enum Argument {
    /// Literal kept exactly as written, e.g. `"0.5"` or `"-10"`.
    Literal(String),
    /// Menu choice.
    Menu(String),
    /// Reporter or boolean block placed in the slot.
    Expression(Box<PlannedBlock>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedBlock {
    pub entry: CatalogEntry,
    /// Arguments by slot name, in slot order.
    pub args: Vec<(String, Argument)>,
    /// One stack per substack slot of the entry.
    pub substacks: Vec<Vec<PlannedBlock>>,
    /// Position in the source list; `None` for the prepended hat.
    pub source_index: Option<usize>,
}

impl PlannedBlock {
    pub fn opcode(&self) -> &str {
        &self.entry.opcode
    }

    pub fn arg(&self, slot: &str) -> Option<&Argument> {
        self.args.iter().find(|(s, _)| s == slot).map(|(_, a)| a)
    }
}

/// A single script: a hat followed by its stack.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    pub script: Vec<PlannedBlock>,
}

impl BlockPlan {
    /// Opcodes in emission order (depth first), companion shadows excluded.
    pub fn opcodes(&self) -> Vec<String> {
        fn walk(stack: &[PlannedBlock], out: &mut Vec<String>) {
            for b in stack {
                out.push(b.entry.opcode.clone());
                for (_, arg) in &b.args {
                    if let Argument::Expression(e) = arg {
                        walk(std::slice::from_ref(e), out);
                    }
                }
                for sub in &b.substacks {
                    walk(sub, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.script, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Anchor {
    pub x: i64,
    pub y: i64,
}

/// Serialized script ready to drop into a target.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePatch {
    /// Destination target; empty means the first sprite.
    pub target: String,
    /// `None` lets [`inject`] place the script next to existing ones.
    pub anchor: Option<Anchor>,
    pub root: String,
    pub blocks: BTreeMap<String, Block>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodegenError {
    #[error("empty block list")]
    EmptyPlan,
    #[error("the block catalog is empty")]
    EmptyCatalog,
    #[error("item {index}: no block matches {text:?} (closest: {best_candidate:?}, normalized distance {normalized_distance:.3})")]
    NoMatch { index: usize, text: String, best_candidate: Option<String>, normalized_distance: f64 },
    #[error("item {index}: `{opcode}` takes {expected} argument(s), found {found}")]
    ArityMismatch { index: usize, opcode: String, expected: usize, found: usize },
    #[error("item {index}: `end` without an open c-block")]
    DanglingEnd { index: usize },
    #[error("item {index}: `else` without an open if")]
    DanglingElse { index: usize },
    #[error("item {index}: hat block can only start the script")]
    MisplacedHat { index: usize },
    #[error("item {index}: nothing can follow `{after}`")]
    BlockAfterEnd { index: usize, after: String },
}

#[derive(Debug, thiserror::Error)]
pub enum InjectError {
    #[error("no target named `{0}`")]
    UnknownTarget(String),
    #[error("project has no sprite to receive the script")]
    NoSprite,
    #[error("block ID `{0}` already exists")]
    IdCollision(String),
    #[error("injected project fails validation: {}", .0[0])]
    Invalid(Vec<Violation>),
}

/// Resolves each description and builds the script tree.
pub fn parse_block_list(texts: &[impl AsRef<str>], catalog: &Catalog) -> Result<BlockPlan, CodegenError> {
    parse_block_list_with(texts, catalog, DEFAULT_THRESHOLD)
}

pub fn parse_block_list_with(
    texts: &[impl AsRef<str>],
    catalog: &Catalog,
    threshold: f64,
) -> Result<BlockPlan, CodegenError> {
    parse::Parser { catalog, threshold }.parse(texts)
}

/// Serializes a plan with IDs `t1`, `t2`, ... in depth-first order.
pub fn emit_script(plan: &BlockPlan, anchor: Option<Anchor>) -> TemplatePatch {
    emit::emit(plan, anchor)
}

/// Adds the patch's script to its target, renaming IDs that already exist.
pub fn inject(project: &Project, patch: &TemplatePatch) -> Result<Project, InjectError> {
    inject::inject(project, patch)
}

impl TemplatePatch {
    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = target.into();
        self
    }

    /// `{target, anchor, blocks}` using the project.json block encoding.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("target".into(), Value::from(self.target.as_str()));
        map.insert(
            "anchor".into(),
            self.anchor.map_or(Value::Null, |a| serde_json::to_value(a).expect("plain struct")),
        );
        map.insert(
            "blocks".into(),
            Value::Object(self.blocks.iter().map(|(id, b)| (id.clone(), b.to_json())).collect()),
        );
        Value::Object(map)
    }

    pub fn from_json(value: Value) -> Result<Self, Sb3Error> {
        let bad = |m: &str| Sb3Error::MalformedJson(format!("patch: {m}"));
        let Value::Object(mut map) = value else { return Err(bad("expected object")) };
        let target = match map.remove("target") {
            Some(Value::String(s)) => s,
            None | Some(Value::Null) => String::new(),
            _ => return Err(bad("`target` must be a string")),
        };
        let anchor = match map.remove("anchor") {
            None | Some(Value::Null) => None,
            Some(v) => Some(serde_json::from_value(v).map_err(|e| bad(&e.to_string()))?),
        };
        let Some(Value::Object(raw)) = map.remove("blocks") else { return Err(bad("missing `blocks` object")) };
        let mut blocks = BTreeMap::new();
        for (id, v) in raw {
            let block = Block::from_json(v, &format!("patch block `{id}`"))?;
            blocks.insert(id, block);
        }
        let root = blocks
            .iter()
            .find(|(_, b)| b.top_level)
            .map(|(id, _)| id.clone())
            .ok_or_else(|| bad("no top-level block"))?;
        Ok(TemplatePatch { target, anchor, root, blocks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(texts: &[&str]) -> Result<BlockPlan, CodegenError> {
        parse_block_list(texts, Catalog::builtin())
    }

    #[test]
    fn empty_list_is_an_error() {
        assert_eq!(plan(&[]), Err(CodegenError::EmptyPlan));
    }

    #[test]
    fn default_hat_is_prepended() {
        let p = plan(&["move [10] steps"]).unwrap();
        assert_eq!(p.opcodes(), ["event_whenflagclicked", "motion_movesteps"]);
        assert_eq!(p.script[0].source_index, None);
    }

    #[test]
    fn end_closes_substack_early() {
        let p = plan(&["when green flag clicked", "repeat [10]", "move [5] steps", "end", "say [done]"]).unwrap();
        assert_eq!(p.script.len(), 3);
        assert_eq!(p.script[1].substacks[0].len(), 1);
        assert_eq!(p.script[2].opcode(), "looks_say");
    }

    #[test]
    fn dangling_end_and_else() {
        assert_eq!(plan(&["when green flag clicked", "end"]), Err(CodegenError::DanglingEnd { index: 1 }));
        assert_eq!(plan(&["when green flag clicked", "else"]), Err(CodegenError::DanglingElse { index: 1 }));
    }

    #[test]
    fn else_upgrades_if() {
        let p = plan(&["if <mouse down?> then", "show", "else", "hide"]).unwrap();
        let branch = &p.script[1];
        assert_eq!(branch.opcode(), "control_if_else");
        assert_eq!(branch.substacks[0][0].opcode(), "looks_show");
        assert_eq!(branch.substacks[1][0].opcode(), "looks_hide");
    }

    #[test]
    fn arity_mismatch() {
        let err = plan(&["move [10] [20] steps"]).unwrap_err();
        assert!(matches!(err, CodegenError::ArityMismatch { index: 0, expected: 1, found: 2, .. }), "{err:?}");
    }

    #[test]
    fn no_match_carries_index() {
        let err = plan(&["when green flag clicked", "dance wildly across the whole screen"]).unwrap_err();
        assert!(matches!(err, CodegenError::NoMatch { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn hat_after_start_and_block_after_forever() {
        assert_eq!(
            plan(&["when green flag clicked", "when sprite clicked"]),
            Err(CodegenError::MisplacedHat { index: 1 })
        );
        let err = plan(&["forever", "move [1] steps", "end", "hide"]).unwrap_err();
        assert!(matches!(err, CodegenError::BlockAfterEnd { index: 3, .. }), "{err:?}");
    }

    #[test]
    fn reporter_in_number_slot() {
        let p = plan(&["change x by (mouse x)"]).unwrap();
        match p.script[1].arg("DX") {
            Some(Argument::Expression(e)) => assert_eq!(e.opcode(), "sensing_mousex"),
            other => panic!("unexpected {other:?}"),
        }
        let patch = emit_script(&p, None);
        let change = patch.blocks.values().find(|b| b.opcode == "motion_changexby").unwrap();
        assert_eq!(change.inputs["DX"].to_json(), serde_json::json!([3, "t3", [4, ""]]));
    }

    #[test]
    fn empty_forever_has_no_substack_input() {
        let patch = emit_script(&plan(&["forever"]).unwrap(), None);
        assert!(patch.blocks["t2"].inputs.is_empty());
        assert_eq!(patch.blocks["t2"].opcode, "control_forever");
    }

    #[test]
    fn variables_resolve_on_inject() {
        let p = plan(&["set [score] to [0]", "change [score] by [1]"]).unwrap();
        let patch = emit_script(&p, None);
        let project = Project {
            targets: vec![crate::sb3::Target::new_stage(), crate::sb3::Target::new_sprite("Sprite1")],
            ..Default::default()
        };
        let out = inject(&project, &patch).unwrap();
        let vars = out.targets[0].extra["variables"].as_object().unwrap();
        assert_eq!(vars.len(), 1);
        let (id, _) = vars.iter().next().unwrap();
        let set = out.targets[1].blocks.values().find(|b| b.opcode == "data_setvariableto").unwrap();
        assert_eq!(set.fields["VARIABLE"].id, Some(Value::from(id.as_str())));
    }

    #[test]
    fn patch_json_round_trip() {
        let patch = emit_script(&plan(&["when sprite clicked", "forever", "move [10] steps"]).unwrap(), Some(Anchor { x: 5, y: 7 }));
        let back = TemplatePatch::from_json(patch.to_json()).unwrap();
        assert_eq!(back, patch);
    }

    #[test]
    fn second_injection_renames_ids() {
        let patch = emit_script(&plan(&["when sprite clicked", "hide"]).unwrap(), None);
        let project = Project {
            targets: vec![crate::sb3::Target::new_stage(), crate::sb3::Target::new_sprite("Sprite1")],
            ..Default::default()
        };
        let once = inject(&project, &patch).unwrap();
        let twice = inject(&once, &patch).unwrap();
        assert_eq!(twice.targets[1].blocks.len(), 4);
        assert_eq!(crate::sb3::scripts_of(&twice.targets[1]).len(), 2);
        let second_root = twice.targets[1].blocks.get("t3").unwrap();
        assert_eq!(second_root.x, Some(COLUMN_WIDTH.into()));
    }
}
