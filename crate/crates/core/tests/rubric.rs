mod common;

use scratchkit::rubric::{mastery_label, score_project, Dimension, Mastery, MasteryBands, RubricReport};
use serde_json::Value;

fn levels(report: &Value) -> Vec<(String, u64)> {
    Dimension::ALL.iter().map(|d| (d.key().to_string(), report[d.key()].as_u64().unwrap())).collect()
}

#[test]
fn goldens_score_exactly_as_derived() {
    let manifest: Value = serde_json::from_slice(&common::read("goldens/expected.json")).unwrap();
    let goldens = manifest.as_array().unwrap();
    assert_eq!(goldens.len(), 28);
    for g in goldens {
        let file = g["file"].as_str().unwrap();
        let project = common::load(&format!("goldens/{file}"));
        let score = score_project(&project);
        let report = serde_json::to_value(RubricReport::new(&score, MasteryBands::default())).unwrap();
        assert_eq!(levels(&report), levels(&g["expected"]), "{file}");
        let dim = g["dimension"].as_str().unwrap();
        assert_eq!(report[dim], g["level"], "{file}");
        let sum: u64 = levels(&report).iter().map(|(_, l)| l).sum();
        assert_eq!(report["total"].as_u64().unwrap(), sum);
    }
}

#[test]
fn goldens_cover_every_dimension_and_level() {
    let manifest: Value = serde_json::from_slice(&common::read("goldens/expected.json")).unwrap();
    for dim in Dimension::ALL {
        for level in 0..=3u64 {
            assert!(
                manifest.as_array().unwrap().iter().any(|g| g["dimension"] == dim.key() && g["level"] == level),
                "{dim} {level}"
            );
        }
    }
}

#[test]
fn empty_project_scores_zero() {
    let project = common::load("default_project.json");
    let score = score_project(&project);
    assert_eq!(score.total, 0);
    assert_eq!(mastery_label(score.total.into()), Ok(Mastery::Basic));
}

#[test]
fn evidence_names_the_blocks() {
    let score = score_project(&common::load("goldens/logic_1.json"));
    let logic = &score.evidence[&Dimension::Logic];
    assert_eq!(logic.len(), 1);
    assert_eq!(logic[0].block.as_deref(), Some("b"));
    assert_eq!(logic[0].level, 1);
    let parallel = score_project(&common::load("goldens/parallelism_3.json"));
    let roots: Vec<_> = parallel.evidence[&Dimension::Parallelism].iter().map(|e| e.block.clone().unwrap()).collect();
    assert_eq!(roots, ["a", "b"]);
}

#[test]
fn community_project() {
    let score = score_project(&common::load("community/accelerator.json"));
    assert_eq!(score.levels(), [1, 3, 3, 3, 3, 2, 2]);
    assert_eq!(score.total, 17);
    assert_eq!(mastery_label(17), Ok(Mastery::Master));
}

#[test]
fn report_keys() {
    let score = score_project(&common::load("goldens/data_representation_3.json"));
    let report = serde_json::to_value(RubricReport::new(&score, MasteryBands::default())).unwrap();
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "abstraction",
            "data_representation",
            "evidence",
            "flow_control",
            "interactivity",
            "label",
            "logic",
            "parallelism",
            "synchronization",
            "total"
        ]
    );
    assert_eq!(report["label"], "basic");
}

#[test]
fn label_bands() {
    assert_eq!(mastery_label(0), Ok(Mastery::Basic));
    assert_eq!(mastery_label(13), Ok(Mastery::Developing));
    assert_eq!(mastery_label(21), Ok(Mastery::Master));
    assert!(mastery_label(22).is_err());
    let shifted = MasteryBands { developing_from: 9, master_from: 15 };
    assert_eq!(shifted.label(8), Ok(Mastery::Basic));
}
