//! Registry of Scratch 3.0 blocks and fuzzy lookup from block descriptions.
//!
//! Each entry carries the English display text with named holes, e.g.
//! `move ⟨STEPS⟩ steps`. Lookup normalizes both the query and the display
//! text (see [`normalize_text`]) and picks the entry with the smallest
//! Levenshtein distance, so argument values never affect which block matches.

mod text;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use text::{levenshtein, normalize_text, HOLE};
pub(crate) use text::matching_close;

const DEFAULT_CATALOG: &str = include_str!("../../data/catalog.toml");

/// Default acceptance threshold on the normalized distance.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

/// Block categories, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Motion,
    Looks,
    Sound,
    Events,
    Control,
    Sensing,
    Operators,
    Variables,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Motion,
        Category::Looks,
        Category::Sound,
        Category::Events,
        Category::Control,
        Category::Sensing,
        Category::Operators,
        Category::Variables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Motion => "Motion",
            Category::Looks => "Looks",
            Category::Sound => "Sound",
            Category::Events => "Events",
            Category::Control => "Control",
            Category::Sensing => "Sensing",
            Category::Operators => "Operators",
            Category::Variables => "Variables",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Hat,
    Stack,
    CBlock,
    Reporter,
    Boolean,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Number,
    String,
    Menu,
    Condition,
    Substack,
}

/// What a menu slot names inside the project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Variable,
    List,
    Broadcast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
    /// Primitive type code for literal slots (4 number, 5 positive, 6 whole,
    /// 7 integer, 8 angle, 9 colour, 10 text, 11 broadcast).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prim: Option<u8>,
    /// Opcode of the companion menu shadow block, when the menu is an input
    /// rather than a field of the block itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadow: Option<String>,
    /// Field name inside the shadow block, defaulting to the slot name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
}

impl Slot {
    pub fn prim_code(&self) -> u8 {
        match (self.prim, self.kind) {
            (Some(p), _) => p,
            (None, SlotKind::Number) => 4,
            _ => 10,
        }
    }

    pub fn menu_field(&self) -> &str {
        self.field.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub opcode: String,
    pub display_text: String,
    pub category: Category,
    pub shape: Shape,
    pub slots: Vec<Slot>,
    /// Nothing may follow this block in a stack (`forever`, caps).
    pub terminal: bool,
    /// Mutation object emitted with the block, if the block needs one.
    pub mutation: Option<Value>,
    normalized: String,
}

impl CatalogEntry {
    pub fn normalized_text(&self) -> &str {
        &self.normalized
    }

    /// Slots that take an argument, in display order.
    pub fn argument_slots(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter().filter(|s| s.kind != SlotKind::Substack)
    }

    pub fn substack_slots(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter().filter(|s| s.kind == SlotKind::Substack)
    }

    pub fn is_hat(&self) -> bool {
        self.shape == Shape::Hat
    }

    pub fn is_expression(&self) -> bool {
        matches!(self.shape, Shape::Reporter | Shape::Boolean)
    }

    pub fn ends_stack(&self) -> bool {
        self.terminal || self.shape == Shape::Cap
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("duplicate opcode `{0}`")]
    DuplicateOpcode(String),
    #[error("entry #{index} is missing field `{field}`")]
    MissingField { index: usize, field: &'static str },
    #[error("`{opcode}`: display text holes {holes:?} do not match argument slots {slots:?}")]
    HoleMismatch { opcode: String, holes: Vec<String>, slots: Vec<String> },
    #[error("`{opcode}`: mutation is not valid JSON: {message}")]
    BadMutation { opcode: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub opcode: String,
    pub distance: usize,
    pub normalized_distance: f64,
    /// Another entry sits at the same distance.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatchError {
    #[error("the block catalog is empty")]
    EmptyCatalog,
    #[error("no block matches {query:?} (closest: {best_candidate:?}, normalized distance {normalized_distance:.3})")]
    NoMatch { query: String, best_candidate: Option<String>, normalized_distance: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    block: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    opcode: Option<String>,
    category: Option<Category>,
    shape: Option<Shape>,
    text: Option<String>,
    #[serde(default)]
    slots: Vec<Slot>,
    #[serde(default)]
    terminal: bool,
    mutation: Option<String>,
}

/// Immutable block registry.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    by_opcode: HashMap<String, usize>,
}

fn hole_names(text: &str) -> Vec<String> {
    let mut names = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('⟨') {
        let after = &rest[start + '⟨'.len_utf8()..];
        let Some(end) = after.find('⟩') else { break };
        names.push(after[..end].to_string());
        rest = &after[end + '⟩'.len_utf8()..];
    }
    names
}

impl Catalog {
    /// Parses a TOML document with one `[[block]]` table per entry.
    pub fn from_toml(source: &str) -> Result<Self, CatalogError> {
        let raw: RawCatalog = toml::from_str(source).map_err(|e| CatalogError::Parse(e.to_string()))?;
        let mut catalog = Catalog::default();
        for (index, entry) in raw.block.into_iter().enumerate() {
            let missing = |field| CatalogError::MissingField { index, field };
            let opcode = entry.opcode.ok_or_else(|| missing("opcode"))?;
            let category = entry.category.ok_or_else(|| missing("category"))?;
            let shape = entry.shape.ok_or_else(|| missing("shape"))?;
            let display_text = entry.text.ok_or_else(|| missing("text"))?;

            let holes = hole_names(&display_text);
            let slots: Vec<String> = entry
                .slots
                .iter()
                .filter(|s| s.kind != SlotKind::Substack)
                .map(|s| s.name.clone())
                .collect();
            if holes != slots {
                return Err(CatalogError::HoleMismatch { opcode, holes, slots });
            }
            let mutation = entry
                .mutation
                .map(|m| serde_json::from_str(&m))
                .transpose()
                .map_err(|e| CatalogError::BadMutation { opcode: opcode.clone(), message: e.to_string() })?;
            if catalog.by_opcode.contains_key(&opcode) {
                return Err(CatalogError::DuplicateOpcode(opcode));
            }
            catalog.by_opcode.insert(opcode.clone(), catalog.entries.len());
            catalog.entries.push(CatalogEntry {
                normalized: normalize_text(&display_text),
                opcode,
                display_text,
                category,
                shape,
                slots: entry.slots,
                terminal: entry.terminal,
                mutation,
            });
        }
        Ok(catalog)
    }

    /// The catalog shipped with this crate.
    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| Catalog::from_toml(DEFAULT_CATALOG).expect("shipped catalog is valid"))
    }

    pub fn builtin_source() -> &'static str {
        DEFAULT_CATALOG
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, opcode: &str) -> Option<&CatalogEntry> {
        self.by_opcode.get(opcode).map(|&i| &self.entries[i])
    }

    /// Matches with the default threshold against every entry.
    pub fn match_block(&self, query: &str) -> Result<MatchResult, MatchError> {
        self.match_where(query, DEFAULT_THRESHOLD, |_| true)
    }

    /// Best entry among those accepted by `filter`. Ties go to the earlier
    /// category, then the smaller opcode, and are flagged `ambiguous`.
    pub fn match_where(
        &self,
        query: &str,
        threshold: f64,
        filter: impl Fn(&CatalogEntry) -> bool,
    ) -> Result<MatchResult, MatchError> {
        let normalized = normalize_text(query);
        let query_len = normalized.chars().count();
        let mut scored: Vec<(usize, &CatalogEntry)> = self
            .entries
            .iter()
            .filter(|e| filter(e))
            .map(|e| (levenshtein(&normalized, &e.normalized), e))
            .collect();
        if scored.is_empty() {
            return Err(MatchError::EmptyCatalog);
        }
        scored.sort_by(|(da, a), (db, b)| {
            da.cmp(db)
                .then(a.category.cmp(&b.category))
                .then_with(|| a.opcode.cmp(&b.opcode))
        });
        let (distance, best) = scored[0];
        let ambiguous = scored.get(1).is_some_and(|(d, _)| *d == distance);
        let longest = query_len.max(best.normalized.chars().count());
        let normalized_distance = if longest == 0 { 0.0 } else { distance as f64 / longest as f64 };
        if normalized_distance > threshold {
            return Err(MatchError::NoMatch {
                query: query.to_string(),
                best_candidate: Some(best.opcode.clone()),
                normalized_distance,
            });
        }
        Ok(MatchResult { opcode: best.opcode.clone(), distance, normalized_distance, ambiguous })
    }
}

/// Free-function form of [`Catalog::match_block`].
pub fn match_block(query: &str, catalog: &Catalog) -> Result<MatchResult, MatchError> {
    catalog.match_block(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_spans_all_categories() {
        let catalog = Catalog::builtin();
        assert!(catalog.len() >= 100, "only {} entries", catalog.len());
        for category in Category::ALL {
            assert!(catalog.entries().iter().any(|e| e.category == category), "{category} missing");
        }
    }

    #[test]
    fn duplicate_opcode_rejected() {
        let doc = r#"
[[block]]
opcode = "motion_movesteps"
category = "Motion"
shape = "stack"
text = "move ⟨STEPS⟩ steps"
slots = [{ name = "STEPS", kind = "number" }]

[[block]]
opcode = "motion_movesteps"
category = "Motion"
shape = "stack"
text = "walk ⟨STEPS⟩ steps"
slots = [{ name = "STEPS", kind = "number" }]
"#;
        match Catalog::from_toml(doc) {
            Err(CatalogError::DuplicateOpcode(op)) => assert_eq!(op, "motion_movesteps"),
            other => panic!("expected DuplicateOpcode, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_and_hole_mismatch() {
        let doc = "[[block]]\nopcode = \"x\"\ncategory = \"Motion\"\ntext = \"x\"\n";
        assert!(matches!(Catalog::from_toml(doc), Err(CatalogError::MissingField { field: "shape", .. })));
        let doc = "[[block]]\nopcode = \"x\"\ncategory = \"Motion\"\nshape = \"stack\"\ntext = \"go ⟨A⟩\"\n";
        assert!(matches!(Catalog::from_toml(doc), Err(CatalogError::HoleMismatch { .. })));
    }

    #[test]
    fn empty_document_gives_empty_catalog() {
        let catalog = Catalog::from_toml("").unwrap();
        assert!(catalog.is_empty());
        assert_eq!(catalog.match_block("forever"), Err(MatchError::EmptyCatalog));
    }

    #[test]
    fn table_one_block_texts() {
        let catalog = Catalog::builtin();
        let m = catalog.match_block("when sprite clicked").unwrap();
        assert_eq!((m.opcode.as_str(), m.distance), ("event_whenthisspriteclicked", 0));
        let m = catalog.match_block("move [10] steps").unwrap();
        assert_eq!((m.opcode.as_str(), m.distance), ("motion_movesteps", 0));
        let m = catalog.match_block("forever").unwrap();
        assert_eq!((m.opcode.as_str(), m.distance, m.ambiguous), ("control_forever", 0, false));
    }

    #[test]
    fn unrelated_text_is_rejected() {
        match Catalog::builtin().match_block("fly to the moon and back again") {
            Err(MatchError::NoMatch { best_candidate, normalized_distance, .. }) => {
                assert!(best_candidate.is_some());
                assert!(normalized_distance > DEFAULT_THRESHOLD);
            }
            other => panic!("expected NoMatch, got {other:?}"),
        }
    }

    #[test]
    fn tie_prefers_earlier_category() {
        let doc = r#"
[[block]]
opcode = "b_block"
category = "Looks"
shape = "stack"
text = "abcdef"

[[block]]
opcode = "a_block"
category = "Control"
shape = "stack"
text = "abcdeg"
"#;
        let catalog = Catalog::from_toml(doc).unwrap();
        let m = catalog.match_block("abcdex").unwrap();
        assert_eq!(m.opcode, "b_block");
        assert!(m.ambiguous);
    }
}
