use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};

use serde_json::{Map, Value};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

use super::{validate, Block, Field, Input, InputKind, InputValue, Project, Sb3Error, Target};

const PROJECT_JSON: &str = "project.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectFormat {
    /// `.sb3` zip container.
    Archive,
    /// Bare `project.json` document.
    Json,
}

impl ProjectFormat {
    /// Zip local-file magic means archive, anything else is treated as JSON.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.starts_with(b"PK\x03\x04") || bytes.starts_with(b"PK\x05\x06") {
            ProjectFormat::Archive
        } else {
            ProjectFormat::Json
        }
    }
}

/// Parses and validates a project. Top-level blocks without coordinates are
/// placed at (0, 0).
pub fn load_project(bytes: &[u8], format: ProjectFormat) -> Result<Project, Sb3Error> {
    let mut project = match format {
        ProjectFormat::Json => parse_json(bytes)?,
        ProjectFormat::Archive => read_archive(bytes)?,
    };
    repair_coordinates(&mut project);
    if let Some(violation) = validate(&project).into_iter().next() {
        return Err(Sb3Error::GraphInconsistency {
            block: violation.offending_id().to_string(),
            violation: Box::new(violation),
        });
    }
    Ok(project)
}

/// Serializes a valid project. Object keys come out sorted, so equal models
/// produce identical bytes.
pub fn save_project(project: &Project, format: ProjectFormat) -> Result<Vec<u8>, Sb3Error> {
    let violations = validate(project);
    if !violations.is_empty() {
        return Err(Sb3Error::ValidationFailure(violations));
    }
    let json = serde_json::to_vec(&project.to_json())
        .map_err(|e| Sb3Error::MalformedJson(e.to_string()))?;
    match format {
        ProjectFormat::Json => Ok(json),
        ProjectFormat::Archive => write_archive(&json, &project.assets),
    }
}

fn parse_json(bytes: &[u8]) -> Result<Project, Sb3Error> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| Sb3Error::MalformedJson(e.to_string()))?;
    Project::from_json(value)
}

fn read_archive(bytes: &[u8]) -> Result<Project, Sb3Error> {
    let mut archive =
        ZipArchive::new(Cursor::new(bytes)).map_err(|e| Sb3Error::MalformedArchive(e.to_string()))?;
    let mut json = None;
    let mut assets = BTreeMap::new();
    for i in 0..archive.len() {
        let mut file = archive.by_index(i).map_err(|e| Sb3Error::MalformedArchive(e.to_string()))?;
        if file.is_dir() {
            continue;
        }
        let name = file.name().to_string();
        let mut buf = Vec::with_capacity(file.size() as usize);
        file.read_to_end(&mut buf)
            .map_err(|e| Sb3Error::MalformedArchive(format!("{name}: {e}")))?;
        if json.is_none() && (name == PROJECT_JSON || name.ends_with("/project.json")) {
            json = Some(buf);
        } else {
            assets.insert(name, buf);
        }
    }
    let json = json.ok_or_else(|| Sb3Error::MalformedArchive("no project.json member".into()))?;
    let mut project = parse_json(&json)?;
    project.assets = assets;
    Ok(project)
}

fn write_archive(json: &[u8], assets: &BTreeMap<String, Vec<u8>>) -> Result<Vec<u8>, Sb3Error> {
    let zip_err = |e: zip::result::ZipError| Sb3Error::MalformedArchive(e.to_string());
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default());
    let mut writer = ZipWriter::new(Cursor::new(Vec::new()));
    writer.start_file(PROJECT_JSON, options).map_err(zip_err)?;
    writer.write_all(json)?;
    for (name, data) in assets {
        writer.start_file(name.as_str(), options).map_err(zip_err)?;
        writer.write_all(data)?;
    }
    Ok(writer.finish().map_err(zip_err)?.into_inner())
}

fn repair_coordinates(project: &mut Project) {
    for target in &mut project.targets {
        for (id, block) in &mut target.blocks {
            if block.parent.is_none() && block.top_level && (block.x.is_none() || block.y.is_none()) {
                tracing::warn!(target = %target.name, block = %id, "top-level block without coordinates, placing at (0,0)");
                block.x.get_or_insert_with(|| 0.into());
                block.y.get_or_insert_with(|| 0.into());
            }
        }
    }
}

fn malformed(context: &str, msg: impl std::fmt::Display) -> Sb3Error {
    Sb3Error::MalformedJson(format!("{context}: {msg}"))
}

fn take_object(value: Value, context: &str) -> Result<Map<String, Value>, Sb3Error> {
    match value {
        Value::Object(map) => Ok(map),
        other => Err(malformed(context, format!("expected object, found {}", kind_name(&other)))),
    }
}

fn kind_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn opt_id(value: Option<Value>, context: &str, key: &str) -> Result<Option<String>, Sb3Error> {
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(malformed(context, format!("`{key}` must be a string or null, found {}", kind_name(&other)))),
    }
}

fn opt_bool(value: Option<Value>, context: &str, key: &str) -> Result<bool, Sb3Error> {
    match value {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(b),
        Some(other) => Err(malformed(context, format!("`{key}` must be a boolean, found {}", kind_name(&other)))),
    }
}

impl Project {
    pub fn from_json(value: Value) -> Result<Self, Sb3Error> {
        let mut root = take_object(value, "project")?;
        let targets = match root.remove("targets") {
            Some(Value::Array(items)) => items
                .into_iter()
                .enumerate()
                .map(|(i, t)| Target::from_json(t, i))
                .collect::<Result<Vec<_>, _>>()?,
            Some(other) => return Err(malformed("project", format!("`targets` must be an array, found {}", kind_name(&other)))),
            None => return Err(malformed("project", "missing `targets`")),
        };
        let meta = match root.remove("meta") {
            Some(v) => take_object(v, "meta")?,
            None => Map::new(),
        };
        Ok(Project {
            targets,
            meta,
            monitors: root.remove("monitors").unwrap_or_else(|| Value::Array(vec![])),
            extensions: root.remove("extensions").unwrap_or_else(|| Value::Array(vec![])),
            extra: root,
            assets: BTreeMap::new(),
        })
    }

    pub fn to_json(&self) -> Value {
        let mut root = self.extra.clone();
        root.insert("targets".into(), Value::Array(self.targets.iter().map(Target::to_json).collect()));
        root.insert("meta".into(), Value::Object(self.meta.clone()));
        root.insert("monitors".into(), self.monitors.clone());
        root.insert("extensions".into(), self.extensions.clone());
        Value::Object(root)
    }
}

impl Target {
    fn from_json(value: Value, index: usize) -> Result<Self, Sb3Error> {
        let context = format!("target #{index}");
        let mut map = take_object(value, &context)?;
        let is_stage = match map.remove("isStage") {
            Some(Value::Bool(b)) => b,
            _ => return Err(malformed(&context, "missing boolean `isStage`")),
        };
        let name = match map.remove("name") {
            Some(Value::String(s)) => s,
            _ => return Err(malformed(&context, "missing string `name`")),
        };
        let context = format!("target `{name}`");
        let mut blocks = BTreeMap::new();
        let mut primitives = BTreeMap::new();
        if let Some(raw) = map.remove("blocks") {
            for (id, value) in take_object(raw, &context)? {
                match value {
                    Value::Array(_) => {
                        primitives.insert(id, value);
                    }
                    other => {
                        let block = Block::from_json(other, &format!("{context} block `{id}`"))?;
                        blocks.insert(id, block);
                    }
                }
            }
        }
        let costumes = match map.remove("costumes") {
            None => Vec::new(),
            Some(Value::Array(items)) => items,
            Some(other) => return Err(malformed(&context, format!("`costumes` must be an array, found {}", kind_name(&other)))),
        };
        Ok(Target { is_stage, name, blocks, primitives, costumes, extra: map })
    }

    fn to_json(&self) -> Value {
        let mut map = self.extra.clone();
        let mut blocks: Map<String, Value> =
            self.blocks.iter().map(|(id, b)| (id.clone(), b.to_json())).collect();
        for (id, prim) in &self.primitives {
            blocks.insert(id.clone(), prim.clone());
        }
        map.insert("isStage".into(), Value::Bool(self.is_stage));
        map.insert("name".into(), Value::String(self.name.clone()));
        map.insert("blocks".into(), Value::Object(blocks));
        map.insert("costumes".into(), Value::Array(self.costumes.clone()));
        Value::Object(map)
    }
}

impl Block {
    pub(crate) fn from_json(value: Value, context: &str) -> Result<Self, Sb3Error> {
        let mut map = take_object(value, context)?;
        let opcode = match map.remove("opcode") {
            Some(Value::String(s)) => s,
            _ => return Err(malformed(context, "missing string `opcode`")),
        };
        let next = opt_id(map.remove("next"), context, "next")?;
        let parent = opt_id(map.remove("parent"), context, "parent")?;
        let mut inputs = BTreeMap::new();
        if let Some(raw) = map.remove("inputs") {
            for (name, v) in take_object(raw, context)? {
                let input = Input::from_json(v, &format!("{context} input `{name}`"))?;
                inputs.insert(name, input);
            }
        }
        let mut fields = BTreeMap::new();
        if let Some(raw) = map.remove("fields") {
            for (name, v) in take_object(raw, context)? {
                let field = Field::from_json(v, &format!("{context} field `{name}`"))?;
                fields.insert(name, field);
            }
        }
        let shadow = opt_bool(map.remove("shadow"), context, "shadow")?;
        let top_level = opt_bool(map.remove("topLevel"), context, "topLevel")?;
        let coord = |v: Option<Value>, key: &str| match v {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(Some(n)),
            Some(other) => Err(malformed(context, format!("`{key}` must be a number, found {}", kind_name(&other)))),
        };
        let x = coord(map.remove("x"), "x")?;
        let y = coord(map.remove("y"), "y")?;
        Ok(Block { opcode, next, parent, inputs, fields, shadow, top_level, x, y, extra: map })
    }

    pub fn to_json(&self) -> Value {
        let mut map = self.extra.clone();
        let id = |v: &Option<String>| v.clone().map(Value::String).unwrap_or(Value::Null);
        map.insert("opcode".into(), Value::String(self.opcode.clone()));
        map.insert("next".into(), id(&self.next));
        map.insert("parent".into(), id(&self.parent));
        map.insert(
            "inputs".into(),
            Value::Object(self.inputs.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
        );
        map.insert(
            "fields".into(),
            Value::Object(self.fields.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
        );
        map.insert("shadow".into(), Value::Bool(self.shadow));
        map.insert("topLevel".into(), Value::Bool(self.top_level));
        if let Some(x) = &self.x {
            map.insert("x".into(), Value::Number(x.clone()));
        }
        if let Some(y) = &self.y {
            map.insert("y".into(), Value::Number(y.clone()));
        }
        Value::Object(map)
    }
}

impl InputValue {
    fn from_json(value: Value, context: &str) -> Result<Self, Sb3Error> {
        match value {
            Value::Null => Ok(InputValue::Null),
            Value::String(id) => Ok(InputValue::Block(id)),
            Value::Array(items) => Ok(InputValue::Primitive(items)),
            other => Err(malformed(context, format!("unexpected {} in input", kind_name(&other)))),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            InputValue::Null => Value::Null,
            InputValue::Block(id) => Value::String(id.clone()),
            InputValue::Primitive(items) => Value::Array(items.clone()),
        }
    }
}

impl Input {
    fn from_json(value: Value, context: &str) -> Result<Self, Sb3Error> {
        let Value::Array(items) = value else {
            return Err(malformed(context, "input must be an array"));
        };
        if !(2..=3).contains(&items.len()) {
            return Err(malformed(context, format!("input array has {} elements", items.len())));
        }
        let mut items = items.into_iter();
        let kind = items
            .next()
            .and_then(|v| v.as_u64())
            .and_then(InputKind::from_code)
            .ok_or_else(|| malformed(context, "input kind must be 1, 2 or 3"))?;
        let value = InputValue::from_json(items.next().unwrap_or(Value::Null), context)?;
        let obscured = items.next().map(|v| InputValue::from_json(v, context)).transpose()?;
        Ok(Input { kind, value, obscured })
    }

    pub fn to_json(&self) -> Value {
        let mut arr = vec![Value::from(self.kind.code()), self.value.to_json()];
        if let Some(shadow) = &self.obscured {
            arr.push(shadow.to_json());
        }
        Value::Array(arr)
    }
}

impl Field {
    fn from_json(value: Value, context: &str) -> Result<Self, Sb3Error> {
        let Value::Array(items) = value else {
            return Err(malformed(context, "field must be an array"));
        };
        if !(1..=2).contains(&items.len()) {
            return Err(malformed(context, format!("field array has {} elements", items.len())));
        }
        let mut items = items.into_iter();
        let value = items.next().unwrap_or(Value::Null);
        Ok(Field { value, id: items.next() })
    }

    pub fn to_json(&self) -> Value {
        let mut arr = vec![self.value.clone()];
        if let Some(id) = &self.id {
            arr.push(id.clone());
        }
        Value::Array(arr)
    }
}
