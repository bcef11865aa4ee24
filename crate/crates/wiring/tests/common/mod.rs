use std::path::{Path, PathBuf};

use comodi_wiring::{descriptors_from_dir, load_mocks, load_project, Descriptors, MockImplementations, ProjectDescription};

pub fn project_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/projects").join(name)
}

pub fn load(name: &str) -> (ProjectDescription, Descriptors, MockImplementations) {
    let dir = project_dir(name);
    let p = load_project(&std::fs::read_to_string(dir.join("project.xml")).unwrap()).unwrap();
    let d = descriptors_from_dir(&p, &dir).unwrap();
    let m = load_mocks(&std::fs::read_to_string(dir.join("mocks.xml")).unwrap()).unwrap();
    (p, d, m)
}
