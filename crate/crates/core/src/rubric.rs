//! Computational-thinking rubric over seven dimensions, each scored 0 to 3.
//!
//! Every dimension has three levels, each triggered by the presence of
//! particular blocks or script patterns. A dimension's score is the highest
//! level with at least one piece of evidence, so adding blocks never lowers a
//! score. Unknown opcodes contribute nothing.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::sb3::{scripts_of, Project, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Abstraction,
    Parallelism,
    Logic,
    Synchronization,
    FlowControl,
    Interactivity,
    #[serde(rename = "data_representation")]
    Data,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::Abstraction,
        Dimension::Parallelism,
        Dimension::Logic,
        Dimension::Synchronization,
        Dimension::FlowControl,
        Dimension::Interactivity,
        Dimension::Data,
    ];

    /// Report key.
    pub fn key(self) -> &'static str {
        match self {
            Dimension::Abstraction => "abstraction",
            Dimension::Parallelism => "parallelism",
            Dimension::Logic => "logic",
            Dimension::Synchronization => "synchronization",
            Dimension::FlowControl => "flow_control",
            Dimension::Interactivity => "interactivity",
            Dimension::Data => "data_representation",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub target: String,
    /// `None` for evidence about the project shape, such as sprite count.
    pub block: Option<String>,
    pub level: u8,
    pub rule: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RubricScore {
    pub abstraction: u8,
    pub parallelism: u8,
    pub logic: u8,
    pub synchronization: u8,
    pub flow_control: u8,
    pub interactivity: u8,
    pub data: u8,
    pub total: u8,
    /// Evidence for the awarded level of each dimension.
    pub evidence: BTreeMap<Dimension, Vec<Evidence>>,
}

impl RubricScore {
    pub fn get(&self, dim: Dimension) -> u8 {
        match dim {
            Dimension::Abstraction => self.abstraction,
            Dimension::Parallelism => self.parallelism,
            Dimension::Logic => self.logic,
            Dimension::Synchronization => self.synchronization,
            Dimension::FlowControl => self.flow_control,
            Dimension::Interactivity => self.interactivity,
            Dimension::Data => self.data,
        }
    }

    fn set(&mut self, dim: Dimension, level: u8) {
        let slot = match dim {
            Dimension::Abstraction => &mut self.abstraction,
            Dimension::Parallelism => &mut self.parallelism,
            Dimension::Logic => &mut self.logic,
            Dimension::Synchronization => &mut self.synchronization,
            Dimension::FlowControl => &mut self.flow_control,
            Dimension::Interactivity => &mut self.interactivity,
            Dimension::Data => &mut self.data,
        };
        *slot = level;
    }

    pub fn levels(&self) -> [u8; 7] {
        Dimension::ALL.map(|d| self.get(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mastery {
    Basic,
    Developing,
    Master,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RubricError {
    #[error("total {0} is outside 0..=21")]
    OutOfRange(u32),
}

/// Lower bounds of the `developing` and `master` bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MasteryBands {
    pub developing_from: u32,
    pub master_from: u32,
}

impl Default for MasteryBands {
    fn default() -> Self {
        MasteryBands { developing_from: 8, master_from: 15 }
    }
}

impl MasteryBands {
    pub fn label(&self, total: u32) -> Result<Mastery, RubricError> {
        match total {
            t if t > 21 => Err(RubricError::OutOfRange(t)),
            t if t >= self.master_from => Ok(Mastery::Master),
            t if t >= self.developing_from => Ok(Mastery::Developing),
            _ => Ok(Mastery::Basic),
        }
    }
}

/// basic 0-7, developing 8-14, master 15-21.
pub fn mastery_label(total: u32) -> Result<Mastery, RubricError> {
    MasteryBands::default().label(total)
}

const CLONE_BLOCKS: &[&str] = &["control_create_clone_of", "control_start_as_clone", "control_delete_this_clone"];
const LOGIC_OPERATORS: &[&str] = &["operator_and", "operator_or", "operator_not"];
const SYNC_ADVANCED: &[&str] = &["control_wait_until", "event_whenbackdropswitchesto", "event_broadcastandwait"];
const LOOPS: &[&str] = &["control_repeat", "control_forever"];
const USER_EVENTS: &[&str] = &[
    "event_whenkeypressed",
    "event_whenthisspriteclicked",
    "sensing_askandwait",
    "sensing_keypressed",
    "sensing_mousedown",
    "sensing_mousex",
    "sensing_mousey",
];
const ATTRIBUTE_SETTERS: &[&str] = &[
    "motion_movesteps",
    "motion_turnright",
    "motion_turnleft",
    "motion_goto",
    "motion_gotoxy",
    "motion_glideto",
    "motion_glidesecstoxy",
    "motion_pointindirection",
    "motion_pointtowards",
    "motion_changexby",
    "motion_setx",
    "motion_changeyby",
    "motion_sety",
    "motion_ifonedgebounce",
    "motion_setrotationstyle",
    "looks_switchcostumeto",
    "looks_nextcostume",
    "looks_switchbackdropto",
    "looks_switchbackdroptoandwait",
    "looks_nextbackdrop",
    "looks_changesizeby",
    "looks_setsizeto",
    "looks_changeeffectby",
    "looks_seteffectto",
    "looks_cleargraphiceffects",
    "looks_show",
    "looks_hide",
    "looks_gotofrontback",
    "looks_goforwardbackward",
];
const VARIABLE_OPS: &[&str] = &[
    "data_setvariableto",
    "data_changevariableby",
    "data_showvariable",
    "data_hidevariable",
];
const LIST_OPS: &[&str] = &[
    "data_addtolist",
    "data_deleteoflist",
    "data_deletealloflist",
    "data_insertatlist",
    "data_replaceitemoflist",
    "data_itemoflist",
    "data_itemnumoflist",
    "data_lengthoflist",
    "data_listcontainsitem",
    "data_showlist",
    "data_hidelist",
];

/// (dimension, level, rule) for a single block, ignoring context.
fn block_rules(opcode: &str, field: impl Fn(&str) -> Option<String>) -> Vec<(Dimension, u8, &'static str)> {
    use Dimension::*;
    let mut out = Vec::new();
    let is = |set: &[&str]| set.contains(&opcode);
    if opcode == "procedures_definition" {
        out.push((Abstraction, 2, "custom block definition"));
    }
    if is(CLONE_BLOCKS) {
        out.push((Abstraction, 3, "clone blocks"));
    }
    match opcode {
        "control_if" => out.push((Logic, 1, "if")),
        "control_if_else" => out.push((Logic, 2, "if-else")),
        _ if is(LOGIC_OPERATORS) => out.push((Logic, 3, "logic operator")),
        _ => {}
    }
    if opcode == "control_wait" {
        out.push((Synchronization, 1, "wait"));
    }
    if is(SYNC_ADVANCED) {
        out.push((Synchronization, 3, "wait until / backdrop change / broadcast and wait"));
    }
    if is(LOOPS) {
        out.push((FlowControl, 2, "repeat / forever"));
    }
    if opcode == "control_repeat_until" {
        out.push((FlowControl, 3, "repeat until"));
    }
    if opcode == "event_whenflagclicked" {
        out.push((Interactivity, 1, "green flag"));
    }
    if is(USER_EVENTS) {
        out.push((Interactivity, 2, "key / sprite click / ask / mouse"));
    }
    let loudness_hat = opcode == "event_whengreaterthan"
        && field("WHENGREATERTHANMENU").is_some_and(|v| v.eq_ignore_ascii_case("loudness"));
    if opcode == "sensing_loudness" || opcode.starts_with("videoSensing_") || loudness_hat {
        out.push((Interactivity, 3, "video / loudness"));
    }
    if is(ATTRIBUTE_SETTERS) {
        out.push((Data, 1, "sprite attribute modification"));
    }
    if is(VARIABLE_OPS) {
        out.push((Data, 2, "variable operation"));
    }
    if is(LIST_OPS) {
        out.push((Data, 3, "list operation"));
    }
    out
}

/// Hat opcode and the event key that makes two scripts "the same event".
fn parallel_key(target: &Target, opcode: &str, field: impl Fn(&str) -> Option<String>) -> Option<(u8, String)> {
    match opcode {
        "event_whenflagclicked" => Some((1, "flag".into())),
        "event_whenkeypressed" => Some((2, format!("key:{}", field("KEY_OPTION").unwrap_or_default()))),
        "event_whenthisspriteclicked" | "event_whenstageclicked" => Some((2, format!("click:{}", target.name))),
        "event_whenbroadcastreceived" => {
            Some((3, format!("receive:{}", field("BROADCAST_OPTION").unwrap_or_default())))
        }
        "event_whenbackdropswitchesto" => Some((3, format!("backdrop:{}", field("BACKDROP").unwrap_or_default()))),
        _ => None,
    }
}

/// Scores a validated project.
pub fn score_project(project: &Project) -> RubricScore {
    let mut found: Vec<(Dimension, Evidence)> = Vec::new();
    let mut push = |dim, target: &Target, block: Option<&str>, level, rule| {
        found.push((dim, Evidence { target: target.name.clone(), block: block.map(str::to_string), level, rule }));
    };

    let mut script_roots = Vec::new();
    let mut hats: BTreeMap<(u8, String), Vec<(&Target, &str)>> = BTreeMap::new();
    let mut broadcasts = Vec::new();
    let mut receivers = Vec::new();

    for target in &project.targets {
        for script in scripts_of(target) {
            let (root_id, root) = target.blocks.get_key_value(&script.root).expect("script root exists");
            let root_id = root_id.as_str();
            let field = |name: &str| root.fields.get(name).map(|f| f.text());
            if let Some(key) = parallel_key(target, &root.opcode, field) {
                hats.entry(key).or_default().push((target, root_id));
            }
            script_roots.push((target, root_id));
        }
        for (id, block) in target.blocks.iter().filter(|(_, b)| !b.shadow) {
            let field = |name: &str| block.fields.get(name).map(|f| f.text());
            for (dim, level, rule) in block_rules(&block.opcode, field) {
                push(dim, target, Some(id), level, rule);
            }
            if block.next.is_some() {
                push(Dimension::FlowControl, target, Some(id), 1, "block sequence");
            }
            match block.opcode.as_str() {
                "event_broadcast" => broadcasts.push((target, id)),
                "event_whenbroadcastreceived" => receivers.push((target, id)),
                _ => {}
            }
        }
    }

    if script_roots.len() > 1 {
        for (target, root) in &script_roots {
            push(Dimension::Abstraction, target, Some(root), 1, "more than one script");
        }
    }
    let sprites: Vec<&Target> = project.sprites().collect();
    if sprites.len() > 1 {
        for target in sprites {
            push(Dimension::Abstraction, target, None, 1, "more than one sprite");
        }
    }
    for ((level, _), group) in &hats {
        if group.len() >= 2 {
            let rule = match level {
                1 => "two scripts on green flag",
                2 => "two scripts on the same key or click",
                _ => "two scripts on the same broadcast or backdrop",
            };
            for (target, root) in group {
                push(Dimension::Parallelism, target, Some(root), *level, rule);
            }
        }
    }
    if !broadcasts.is_empty() && !receivers.is_empty() {
        for (target, id) in broadcasts.iter().chain(&receivers) {
            push(Dimension::Synchronization, target, Some(id), 2, "broadcast and when I receive");
        }
    }

    let mut score = RubricScore::default();
    for dim in Dimension::ALL {
        let level = found.iter().filter(|(d, _)| *d == dim).map(|(_, e)| e.level).max().unwrap_or(0);
        score.set(dim, level);
        let evidence: Vec<Evidence> = found
            .iter()
            .filter(|(d, e)| *d == dim && e.level == level && level > 0)
            .map(|(_, e)| e.clone())
            .collect();
        score.evidence.insert(dim, evidence);
    }
    score.total = score.levels().iter().sum();
    score
}

/// JSON report: the seven dimensions, `total`, `label` and `evidence`.
#[derive(Debug, Clone, Serialize)]
pub struct RubricReport {
    pub abstraction: u8,
    pub parallelism: u8,
    pub logic: u8,
    pub synchronization: u8,
    pub flow_control: u8,
    pub interactivity: u8,
    pub data_representation: u8,
    pub total: u8,
    pub label: Mastery,
    pub evidence: BTreeMap<Dimension, Vec<Evidence>>,
}

impl RubricReport {
    pub fn new(score: &RubricScore, bands: MasteryBands) -> Self {
        RubricReport {
            abstraction: score.abstraction,
            parallelism: score.parallelism,
            logic: score.logic,
            synchronization: score.synchronization,
            flow_control: score.flow_control,
            interactivity: score.interactivity,
            data_representation: score.data,
            total: score.total,
            label: bands.label(score.total.into()).expect("total is at most 21"),
            evidence: score.evidence.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_bands() {
        assert_eq!(mastery_label(0), Ok(Mastery::Basic));
        assert_eq!(mastery_label(7), Ok(Mastery::Basic));
        assert_eq!(mastery_label(8), Ok(Mastery::Developing));
        assert_eq!(mastery_label(13), Ok(Mastery::Developing));
        assert_eq!(mastery_label(14), Ok(Mastery::Developing));
        assert_eq!(mastery_label(15), Ok(Mastery::Master));
        assert_eq!(mastery_label(21), Ok(Mastery::Master));
        assert_eq!(mastery_label(22), Err(RubricError::OutOfRange(22)));
    }

    #[test]
    fn custom_bands() {
        let bands = MasteryBands { developing_from: 9, master_from: 15 };
        assert_eq!(bands.label(8), Ok(Mastery::Basic));
    }

    #[test]
    fn empty_project_scores_zero() {
        let project = Project { targets: vec![Target::new_stage()], ..Default::default() };
        let score = score_project(&project);
        assert_eq!(score.levels(), [0; 7]);
        assert_eq!(score.total, 0);
        assert!(score.evidence.values().all(Vec::is_empty));
    }
}
