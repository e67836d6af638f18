mod common;

use scratchkit::catalog::Catalog;
use scratchkit::codegen::{emit_script, inject, parse_block_list, Anchor, Argument, CodegenError, InjectError};
use scratchkit::metrics::{expansion, retention, snippet_multiset, SnippetMode, SnippetSource};
use scratchkit::sb3::{load_project, save_project, scripts_of, validate, Project, ProjectFormat, Target};
use serde_json::json;

const EXAMPLE1: [&str; 3] = ["when sprite clicked", "forever", "move [10] steps"];
const EXAMPLE2: [&str; 4] = ["when green flag clicked", "forever", "if \"touching [car]\" then", "hide"];
const JUMP: [&str; 4] = ["when space key pressed", "change y by [10]", "wait [0.5] seconds", "change y by [-10]"];

fn empty_project() -> Project {
    Project { targets: vec![Target::new_stage(), Target::new_sprite("Sprite1")], ..Default::default() }
}

#[test]
fn example1_plan_and_encoding() {
    let plan = parse_block_list(&EXAMPLE1, Catalog::builtin()).unwrap();
    assert_eq!(plan.script.len(), 2);
    assert_eq!(plan.script[1].substacks[0][0].arg("STEPS"), Some(&Argument::Literal("10".into())));

    let patch = emit_script(&plan, Some(Anchor { x: 48, y: 64 }));
    let blocks = patch.to_json()["blocks"].clone();
    assert_eq!(
        blocks,
        json!({
            "t1": {"opcode": "event_whenthisspriteclicked", "next": "t2", "parent": null, "inputs": {}, "fields": {},
                   "shadow": false, "topLevel": true, "x": 48, "y": 64},
            "t2": {"opcode": "control_forever", "next": null, "parent": "t1", "inputs": {"SUBSTACK": [2, "t3"]},
                   "fields": {}, "shadow": false, "topLevel": false},
            "t3": {"opcode": "motion_movesteps", "next": null, "parent": "t2", "inputs": {"STEPS": [1, [4, "10"]]},
                   "fields": {}, "shadow": false, "topLevel": false}
        })
    );
}

#[test]
fn example1_matches_editor_layout() {
    let editor = common::load("rabbit_editor.json");
    let patch = emit_script(&parse_block_list(&EXAMPLE1, Catalog::builtin()).unwrap(), None);
    let injected = inject(&empty_project(), &patch).unwrap();
    let ours = snippet_multiset(&injected, SnippetSource::Final, SnippetMode::Strict);
    let theirs = snippet_multiset(&editor, SnippetSource::Final, SnippetMode::Strict);
    assert_eq!(ours.counts, theirs.counts);
    let steps = |p: &Project| {
        let sprite = &p.targets[1];
        let mv = sprite.blocks.values().find(|b| b.opcode == "motion_movesteps").unwrap();
        let forever = &sprite.blocks[mv.parent.as_ref().unwrap()];
        (mv.inputs["STEPS"].to_json(), forever.opcode.clone(), forever.inputs["SUBSTACK"].to_json()[0].clone())
    };
    assert_eq!(steps(&injected), steps(&editor));
}

#[test]
fn example2_nesting_and_condition() {
    let plan = parse_block_list(&EXAMPLE2, Catalog::builtin()).unwrap();
    assert_eq!(
        plan.opcodes(),
        ["event_whenflagclicked", "control_forever", "control_if", "sensing_touchingobject", "looks_hide"]
    );
    let forever = &plan.script[1];
    let branch = &forever.substacks[0][0];
    assert_eq!(branch.opcode(), "control_if");
    assert_eq!(branch.substacks[0][0].opcode(), "looks_hide");

    let patch = emit_script(&plan, None);
    let b = |id: &str| patch.blocks[id].clone();
    assert_eq!(b("t3").opcode, "control_if");
    assert_eq!(b("t3").inputs["CONDITION"].to_json(), json!([2, "t4"]));
    assert_eq!(b("t3").inputs["SUBSTACK"].to_json(), json!([2, "t6"]));
    assert_eq!(b("t4").opcode, "sensing_touchingobject");
    assert_eq!(b("t4").inputs["TOUCHINGOBJECTMENU"].to_json(), json!([1, "t5"]));
    assert_eq!(b("t5").opcode, "sensing_touchingobjectmenu");
    assert!(b("t5").shadow);
    assert_eq!(b("t5").fields["TOUCHINGOBJECTMENU"].to_json(), json!(["car", null]));
    assert_eq!(b("t6").opcode, "looks_hide");
    assert_eq!(b("t6").parent.as_deref(), Some("t3"));
}

#[test]
fn jump_example_is_flat_with_literals_as_written() {
    let plan = parse_block_list(&JUMP, Catalog::builtin()).unwrap();
    assert_eq!(plan.script.len(), 4);
    assert!(plan.script.iter().all(|b| b.substacks.iter().all(Vec::is_empty)));
    let patch = emit_script(&plan, None);
    assert_eq!(patch.blocks["t1"].fields["KEY_OPTION"].to_json(), json!(["space", null]));
    assert_eq!(patch.blocks["t2"].inputs["DY"].to_json(), json!([1, [4, "10"]]));
    assert_eq!(patch.blocks["t3"].inputs["DURATION"].to_json(), json!([1, [5, "0.5"]]));
    assert_eq!(patch.blocks["t4"].inputs["DY"].to_json(), json!([1, [4, "-10"]]));
}

#[test]
fn emission_is_deterministic() {
    let plan = parse_block_list(&EXAMPLE2, Catalog::builtin()).unwrap();
    let a = emit_script(&plan, None).to_json().to_string();
    let b = emit_script(&plan, None).to_json().to_string();
    assert_eq!(a, b);
}

#[test]
fn inject_into_empty_sprite() {
    let patch = emit_script(&parse_block_list(&EXAMPLE1, Catalog::builtin()).unwrap(), None);
    let project = inject(&empty_project(), &patch).unwrap();
    assert_eq!(scripts_of(&project.targets[1]).len(), 1);
    let set = snippet_multiset(&project, SnippetSource::Final, SnippetMode::Opcode);
    assert_eq!(set.count("event_whenthisspriteclicked"), 1);
    assert_eq!(set.count("control_forever"), 1);
    assert_eq!(set.count("motion_movesteps"), 1);
    assert_eq!(set.size(), 3);
}

#[test]
fn unknown_target() {
    let patch = emit_script(&parse_block_list(&EXAMPLE1, Catalog::builtin()).unwrap(), None).with_target("Dog");
    assert!(matches!(inject(&empty_project(), &patch), Err(InjectError::UnknownTarget(t)) if t == "Dog"));
}

#[test]
fn reparse_closure_and_untouched_blocks() {
    let base = common::load("community/accelerator.json");
    let patch = emit_script(&parse_block_list(&EXAMPLE2, Catalog::builtin()).unwrap(), None).with_target("obj_accelerator");
    let injected = inject(&base, &patch).unwrap();
    assert_eq!(validate(&injected), vec![]);
    for (before, after) in base.targets.iter().zip(&injected.targets) {
        for (id, block) in &before.blocks {
            assert_eq!(after.blocks.get(id), Some(block), "{id} changed");
        }
    }
    for format in [ProjectFormat::Json, ProjectFormat::Archive] {
        let reloaded = load_project(&save_project(&injected, format).unwrap(), format).unwrap();
        assert!(reloaded.graph_eq(&injected));
        assert_eq!(scripts_of(&reloaded.targets[2]), scripts_of(&injected.targets[2]));
    }
    let target = &injected.targets[2];
    let new_root = scripts_of(target)
        .into_iter()
        .find(|s| patch.blocks.contains_key(&s.root) && target.blocks[&s.root].opcode == "event_whenflagclicked"
            && !base.targets[2].blocks.contains_key(&s.root))
        .expect("injected script present");
    let rightmost = base.targets[2].blocks.values().filter(|b| b.top_level).map(|b| b.coords().0).fold(f64::MIN, f64::max);
    assert_eq!(target.blocks[&new_root.root].coords(), (rightmost + 400.0, 0.0));
}

#[test]
fn retention_bootstrap() {
    let base = common::load("default_project.json");
    let plan = parse_block_list(&EXAMPLE2, Catalog::builtin()).unwrap();
    let patch = emit_script(&plan, None);
    let template = inject(&empty_project(), &patch).unwrap();
    let injected = inject(&base, &patch).unwrap();
    let x = snippet_multiset(&template, SnippetSource::Template, SnippetMode::Opcode);
    let y = snippet_multiset(&injected, SnippetSource::Final, SnippetMode::Opcode);
    assert_eq!(retention(&x, &y), Ok(1.0));
    assert_eq!(expansion(&x, &y), Ok(0.0));

    let busy = common::load("community/accelerator.json");
    let y = snippet_multiset(&inject(&busy, &patch).unwrap(), SnippetSource::Final, SnippetMode::Opcode);
    let pre = snippet_multiset(&busy, SnippetSource::Final, SnippetMode::Opcode).size();
    assert_eq!(retention(&x, &y), Ok(1.0));
    assert_eq!(expansion(&x, &y), Ok(pre as f64 / (pre + x.size()) as f64));
}

#[test]
fn errors_carry_the_index() {
    let err = parse_block_list(&["when green flag clicked", "fly to the moon and back again"], Catalog::builtin())
        .unwrap_err();
    assert!(matches!(err, CodegenError::NoMatch { index: 1, .. }));
    let err = parse_block_list(&["if \"flying high in the sky\" then"], Catalog::builtin()).unwrap_err();
    assert!(matches!(err, CodegenError::NoMatch { index: 0, .. }), "{err:?}");
}
