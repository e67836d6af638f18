use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use crate::sb3::{validate, Block, InputValue, Project, Target};

use super::{Anchor, InjectError, TemplatePatch};

/// Horizontal gap between an auto-placed script and the rightmost existing one.
pub const COLUMN_WIDTH: i64 = 400;

#[derive(Clone, Copy)]
enum RefKind {
    Variable,
    List,
    Broadcast,
}

impl RefKind {
    fn key(self) -> &'static str {
        match self {
            RefKind::Variable => "variables",
            RefKind::List => "lists",
            RefKind::Broadcast => "broadcasts",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            RefKind::Variable => "var",
            RefKind::List => "list",
            RefKind::Broadcast => "broadcast",
        }
    }

    fn from_field(name: &str) -> Option<Self> {
        match name {
            "VARIABLE" => Some(RefKind::Variable),
            "LIST" => Some(RefKind::List),
            "BROADCAST_OPTION" => Some(RefKind::Broadcast),
            _ => None,
        }
    }

    fn from_prim(code: u64) -> Option<Self> {
        match code {
            11 => Some(RefKind::Broadcast),
            12 => Some(RefKind::Variable),
            13 => Some(RefKind::List),
            _ => None,
        }
    }
}

fn entry_name(kind: RefKind, value: &Value) -> Option<&str> {
    match kind {
        RefKind::Broadcast => value.as_str(),
        _ => value.as_array()?.first()?.as_str(),
    }
}

fn lookup(target: &Target, kind: RefKind, name: &str) -> Option<String> {
    let map = target.extra.get(kind.key())?.as_object()?;
    map.iter()
        .find(|(_, v)| entry_name(kind, v) == Some(name))
        .map(|(id, _)| id.clone())
}

/// Finds or creates the ID of a named variable, list or broadcast. Lookups try
/// the sprite first, then the stage; new entries go on the stage.
fn resolve(project: &mut Project, target_idx: usize, kind: RefKind, name: &str) -> String {
    if let Some(id) = lookup(&project.targets[target_idx], kind, name) {
        return id;
    }
    let stage_idx = project.targets.iter().position(|t| t.is_stage).unwrap_or(target_idx);
    if let Some(id) = lookup(&project.targets[stage_idx], kind, name) {
        return id;
    }
    let taken: BTreeSet<String> = project
        .targets
        .iter()
        .filter_map(|t| t.extra.get(kind.key()).and_then(Value::as_object))
        .flat_map(|m| m.keys().cloned())
        .collect();
    let base = format!("{}-{name}", kind.prefix());
    let id = std::iter::once(base.clone())
        .chain((2..).map(|n| format!("{base}-{n}")))
        .find(|c| !taken.contains(c))
        .expect("unbounded candidates");
    let entry = match kind {
        RefKind::Variable => Value::Array(vec![Value::from(name), Value::from(0)]),
        RefKind::List => Value::Array(vec![Value::from(name), Value::Array(vec![])]),
        RefKind::Broadcast => Value::from(name),
    };
    let stage = &mut project.targets[stage_idx];
    let map = stage
        .extra
        .entry(kind.key())
        .or_insert_with(|| Value::Object(Map::new()));
    if !map.is_object() {
        *map = Value::Object(Map::new());
    }
    map.as_object_mut().expect("object").insert(id.clone(), entry);
    id
}

fn resolve_references(project: &mut Project, target_idx: usize, ids: &[String]) {
    for id in ids {
        let block = project.targets[target_idx].blocks[id].clone();
        let mut updated = block.clone();
        for (name, field) in &block.fields {
            if let (Some(kind), Some(Value::Null)) = (RefKind::from_field(name), &field.id) {
                let resolved = resolve(project, target_idx, kind, &field.text());
                updated.fields.get_mut(name).expect("present").id = Some(Value::from(resolved));
            }
        }
        for (slot, input) in &block.inputs {
            let InputValue::Primitive(prim) = &input.value else { continue };
            let Some(kind) = prim.first().and_then(Value::as_u64).and_then(RefKind::from_prim) else { continue };
            let Some(name) = prim.get(1).and_then(Value::as_str) else { continue };
            let resolved = resolve(project, target_idx, kind, name);
            if let InputValue::Primitive(p) = &mut updated.inputs.get_mut(slot).expect("present").value {
                if p.len() < 3 {
                    p.resize(3, Value::Null);
                }
                p[2] = Value::from(resolved);
            }
        }
        if updated != block {
            project.targets[target_idx].blocks.insert(id.clone(), updated);
        }
    }
}

fn all_ids(project: &Project) -> BTreeSet<String> {
    project
        .targets
        .iter()
        .flat_map(|t| t.blocks.keys().chain(t.primitives.keys()).cloned())
        .collect()
}

fn auto_anchor(target: &Target) -> Anchor {
    let rightmost = target
        .blocks
        .values()
        .filter(|b| b.top_level)
        .map(|b| b.coords().0)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    match rightmost {
        Some(x) => Anchor { x: x.round() as i64 + COLUMN_WIDTH, y: 0 },
        None => Anchor::default(),
    }
}

fn remap_block(block: &Block, map: &BTreeMap<String, String>) -> Block {
    let re = |id: &String| map.get(id).cloned().unwrap_or_else(|| id.clone());
    let mut out = block.clone();
    out.next = block.next.as_ref().map(re);
    out.parent = block.parent.as_ref().map(re);
    for input in out.inputs.values_mut() {
        for value in std::iter::once(&mut input.value).chain(input.obscured.as_mut()) {
            if let InputValue::Block(id) = value {
                *id = re(id);
            }
        }
    }
    out
}

pub(super) fn inject(project: &Project, patch: &TemplatePatch) -> Result<Project, InjectError> {
    let target_idx = if patch.target.is_empty() {
        project.targets.iter().position(|t| !t.is_stage).ok_or(InjectError::NoSprite)?
    } else {
        project
            .targets
            .iter()
            .position(|t| t.name == patch.target)
            .ok_or_else(|| InjectError::UnknownTarget(patch.target.clone()))?
    };

    // Rename patch IDs that clash with anything already in the project.
    let taken = all_ids(project);
    let mut rename = BTreeMap::new();
    if patch.blocks.keys().any(|id| taken.contains(id)) {
        let mut counter = 0usize;
        let mut used = BTreeSet::new();
        for id in patch.blocks.keys() {
            let fresh = loop {
                counter += 1;
                let candidate = format!("t{counter}");
                if !taken.contains(&candidate) && !used.contains(&candidate) {
                    break candidate;
                }
            };
            used.insert(fresh.clone());
            rename.insert(id.clone(), fresh);
        }
    }

    let mut out = project.clone();
    let anchor = patch.anchor.unwrap_or_else(|| auto_anchor(&out.targets[target_idx]));
    let mut new_ids = Vec::with_capacity(patch.blocks.len());
    for (id, block) in &patch.blocks {
        let new_id = rename.get(id).cloned().unwrap_or_else(|| id.clone());
        let mut block = remap_block(block, &rename);
        if block.top_level {
            block.x = Some(anchor.x.into());
            block.y = Some(anchor.y.into());
        }
        if taken.contains(&new_id) {
            return Err(InjectError::IdCollision(new_id));
        }
        out.targets[target_idx].blocks.insert(new_id.clone(), block);
        new_ids.push(new_id);
    }
    resolve_references(&mut out, target_idx, &new_ids);

    let violations = validate(&out);
    if !violations.is_empty() {
        return Err(InjectError::Invalid(violations));
    }
    Ok(out)
}
