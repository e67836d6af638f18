#![allow(dead_code)]

use std::path::{Path, PathBuf};

use scratchkit::sb3::{load_project, Project, ProjectFormat};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn read(rel: &str) -> Vec<u8> {
    std::fs::read(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load(rel: &str) -> Project {
    let bytes = read(rel);
    load_project(&bytes, ProjectFormat::detect(&bytes)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every project fixture, relative to the fixtures directory.
pub fn project_fixtures() -> Vec<String> {
    let mut out = vec![
        "default_project.json".to_string(),
        "rabbit_editor.json".to_string(),
        "community/accelerator.json".to_string(),
        "community/test.sb3".to_string(),
    ];
    let mut goldens: Vec<String> = std::fs::read_dir(fixtures().join("goldens"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json") && n != "expected.json")
        .map(|n| format!("goldens/{n}"))
        .collect();
    goldens.sort();
    out.extend(goldens);
    out
}

pub fn sample_answers() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_answers.json")
}

pub const EXAMPLE1_QUESTION: &str = "How to realize click on the rabbit and make it run all the time?";
pub const EXAMPLE2_QUESTION: &str = "How to make the box disappear when it hits the car?";
