//! Scratch 3.0 project model.
//!
//! A [`Project`] is the in-memory form of a `project.json` document, optionally
//! with the asset members of the `.sb3` archive it came from. Keys the analysis
//! layer does not interpret are kept verbatim in `extra` maps so a project can
//! be written back without losing data.

mod codec;
mod scripts;
mod validate;

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};

pub use codec::{load_project, save_project, ProjectFormat};
pub use scripts::{scripts_of, Script};
pub use validate::{validate, Rule, Violation};

#[derive(Debug, thiserror::Error)]
pub enum Sb3Error {
    #[error("malformed archive: {0}")]
    MalformedArchive(String),
    #[error("malformed project.json: {0}")]
    MalformedJson(String),
    #[error("graph inconsistency at block `{block}`: {violation}")]
    GraphInconsistency { block: String, violation: Box<Violation> },
    #[error("project fails validation ({} violation(s), first: {})", .0.len(), .0[0])]
    ValidationFailure(Vec<Violation>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Project {
    pub targets: Vec<Target>,
    /// The `meta` object (`semver`, `vm`, `agent`).
    pub meta: Map<String, Value>,
    pub monitors: Value,
    pub extensions: Value,
    /// Unrecognised top-level keys.
    pub extra: Map<String, Value>,
    /// Archive members other than `project.json`, by member name.
    pub assets: BTreeMap<String, Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Target {
    pub is_stage: bool,
    pub name: String,
    pub blocks: BTreeMap<String, Block>,
    /// Top-level variable/list reporters, which the format stores as bare
    /// arrays (`[12, "name", "id", x, y]`) inside the block map.
    pub primitives: BTreeMap<String, Value>,
    /// Costume records. For the stage these are the backdrops.
    pub costumes: Vec<Value>,
    /// variables, lists, broadcasts, sounds, layout and the rest.
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub opcode: String,
    pub next: Option<String>,
    pub parent: Option<String>,
    pub inputs: BTreeMap<String, Input>,
    pub fields: BTreeMap<String, Field>,
    pub shadow: bool,
    pub top_level: bool,
    pub x: Option<Number>,
    pub y: Option<Number>,
    /// `mutation`, `comment` and anything else carried on the block.
    pub extra: Map<String, Value>,
}

/// How an input slot relates to its shadow, the first element of the input array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// `[1, shadow]`
    Shadow,
    /// `[2, block]`
    NoShadow,
    /// `[3, block, shadow]`
    ObscuredShadow,
}

impl InputKind {
    pub fn code(self) -> u64 {
        match self {
            InputKind::Shadow => 1,
            InputKind::NoShadow => 2,
            InputKind::ObscuredShadow => 3,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            1 => Some(InputKind::Shadow),
            2 => Some(InputKind::NoShadow),
            3 => Some(InputKind::ObscuredShadow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputValue {
    Null,
    /// Reference to a block in the same target.
    Block(String),
    /// Inline primitive such as `[4, "10"]` or `[12, "score", "id"]`.
    Primitive(Vec<Value>),
}

impl InputValue {
    pub fn block_id(&self) -> Option<&str> {
        match self {
            InputValue::Block(id) => Some(id),
            _ => None,
        }
    }

    pub fn number(value: &str) -> Self {
        InputValue::Primitive(vec![Value::from(4), Value::from(value)])
    }

    pub fn text(value: &str) -> Self {
        InputValue::Primitive(vec![Value::from(10), Value::from(value)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub kind: InputKind,
    pub value: InputValue,
    /// The covered shadow of an [`InputKind::ObscuredShadow`] input.
    pub obscured: Option<InputValue>,
}

impl Input {
    pub fn shadow(value: InputValue) -> Self {
        Input { kind: InputKind::Shadow, value, obscured: None }
    }

    pub fn block(id: impl Into<String>) -> Self {
        Input { kind: InputKind::NoShadow, value: InputValue::Block(id.into()), obscured: None }
    }

    pub fn obscured(id: impl Into<String>, shadow: InputValue) -> Self {
        Input {
            kind: InputKind::ObscuredShadow,
            value: InputValue::Block(id.into()),
            obscured: Some(shadow),
        }
    }

    /// Block IDs referenced by this input, in array order.
    pub fn block_refs(&self) -> impl Iterator<Item = &str> {
        self.value.block_id().into_iter().chain(self.obscured.as_ref().and_then(InputValue::block_id))
    }

    /// The literal carried by a primitive, e.g. `"10"` for `[4, "10"]`.
    pub fn literal(&self) -> Option<&Value> {
        let prim = match (&self.value, &self.obscured) {
            (InputValue::Primitive(p), _) => p,
            (_, Some(InputValue::Primitive(p))) => p,
            _ => return None,
        };
        prim.get(1)
    }
}

/// A field entry, `["value", id]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub value: Value,
    /// `None` when the array had a single element.
    pub id: Option<Value>,
}

impl Field {
    pub fn new(value: impl Into<Value>) -> Self {
        Field { value: value.into(), id: Some(Value::Null) }
    }

    pub fn with_id(value: impl Into<Value>, id: impl Into<Value>) -> Self {
        Field { value: value.into(), id: Some(id.into()) }
    }

    pub fn text(&self) -> String {
        match &self.value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

impl Block {
    /// All block IDs this block points at through `next` or an input.
    pub fn children(&self) -> impl Iterator<Item = &str> {
        self.inputs
            .values()
            .flat_map(Input::block_refs)
            .chain(self.next.as_deref())
    }

    pub fn coords(&self) -> (f64, f64) {
        let f = |n: &Option<Number>| n.as_ref().and_then(Number::as_f64).unwrap_or(0.0);
        (f(&self.x), f(&self.y))
    }
}

impl Target {
    pub fn new_stage() -> Self {
        Target { is_stage: true, name: "Stage".into(), ..Default::default() }
    }

    pub fn new_sprite(name: impl Into<String>) -> Self {
        Target { is_stage: false, name: name.into(), ..Default::default() }
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.blocks.contains_key(id) || self.primitives.contains_key(id)
    }
}

impl Project {
    pub fn stage(&self) -> Option<&Target> {
        self.targets.iter().find(|t| t.is_stage)
    }

    pub fn sprites(&self) -> impl Iterator<Item = &Target> {
        self.targets.iter().filter(|t| !t.is_stage)
    }

    pub fn target(&self, name: &str) -> Option<&Target> {
        self.targets.iter().find(|t| t.name == name)
    }

    pub fn semver(&self) -> Option<&str> {
        self.meta.get("semver").and_then(Value::as_str)
    }

    pub fn agent(&self) -> Option<&str> {
        self.meta.get("agent").and_then(Value::as_str)
    }

    /// Compares block graphs: target order and identity, block maps and
    /// costume counts. Monitors and asset bytes are ignored.
    pub fn graph_eq(&self, other: &Project) -> bool {
        self.targets.len() == other.targets.len()
            && self.targets.iter().zip(&other.targets).all(|(a, b)| {
                a.is_stage == b.is_stage
                    && a.name == b.name
                    && a.blocks == b.blocks
                    && a.primitives == b.primitives
                    && a.costumes.len() == b.costumes.len()
            })
    }

    /// Total number of blocks over all targets, shadows included.
    pub fn block_count(&self) -> usize {
        self.targets.iter().map(|t| t.blocks.len()).sum()
    }
}
