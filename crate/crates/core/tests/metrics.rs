mod common;

use scratchkit::metrics::{
    retention, snippet_multiset, visual_element_count, AdoptionReport, MetricsError, SnippetMode, SnippetSet,
    SnippetSource,
};
use scratchkit::sb3::{Project, Target};
use serde_json::json;

#[test]
fn element_counts() {
    assert_eq!(visual_element_count(&common::load("default_project.json")), 2);
    let mut stage = Target::new_stage();
    stage.costumes = vec![json!({"name": "backdrop1"})];
    let bare = Project { targets: vec![stage.clone()], ..Default::default() };
    assert_eq!(visual_element_count(&bare), 1);
    stage.costumes.push(json!({"name": "backdrop2"}));
    let busy = Project {
        targets: vec![stage, Target::new_sprite("A"), Target::new_sprite("B"), Target::new_sprite("C")],
        ..Default::default()
    };
    assert_eq!(visual_element_count(&busy), 5);
}

#[test]
fn multisets_skip_shadows() {
    let empty = snippet_multiset(&common::load("default_project.json"), SnippetSource::Final, SnippetMode::Opcode);
    assert!(empty.is_empty());
    let ex1 = snippet_multiset(&common::load("rabbit_editor.json"), SnippetSource::Final, SnippetMode::Opcode);
    let expected = SnippetSet::from_counts(
        SnippetSource::Final,
        [("event_whenthisspriteclicked", 1), ("control_forever", 1), ("motion_movesteps", 1)],
    );
    assert_eq!(ex1, expected);
    // The sound menu shadow is excluded.
    let sound = snippet_multiset(&common::load("goldens/data_representation_0.json"), SnippetSource::Final, SnippetMode::Opcode);
    assert_eq!(sound.size(), 1);
}

#[test]
fn duplicates_count_twice() {
    let two = snippet_multiset(&common::load("goldens/parallelism_1.json"), SnippetSource::Final, SnippetMode::Opcode);
    assert_eq!(two.count("event_whenflagclicked"), 2);
}

#[test]
fn strict_mode_sees_menu_choices() {
    let p = common::load("goldens/data_representation_0.json");
    let strict = snippet_multiset(&p, SnippetSource::Final, SnippetMode::Strict);
    assert_eq!(strict.count("sound_playuntildone[SOUND_MENU.SOUND_MENU=Meow]"), 1);
    let template = snippet_multiset(&p, SnippetSource::Template, SnippetMode::Strict);
    assert_eq!(retention(&template, &strict), Ok(1.0));
}

#[test]
fn report_from_projects() {
    let template = common::load("rabbit_editor.json");
    let report = AdoptionReport::from_projects(&template, &template, SnippetMode::Opcode).unwrap();
    assert_eq!((report.retention, report.expansion), (1.0, 0.0));
    assert_eq!((report.intersection_size, report.x_size, report.y_size), (3, 3, 3));
    let empty = common::load("default_project.json");
    assert_eq!(AdoptionReport::from_projects(&empty, &template, SnippetMode::Opcode), Err(MetricsError::EmptyTemplate));
    let value = serde_json::to_value(&report).unwrap();
    assert_eq!(value["mode"], "opcode");
}
