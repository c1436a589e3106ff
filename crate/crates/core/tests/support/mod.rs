//! Helpers shared by the integration tests: corpus access and independent
//! oracles that do not go through the engine.
#![allow(dead_code)]

pub mod exprgen;
pub mod oracle;
pub mod props;

use std::path::{Path, PathBuf};

use vok_core::{Machine, Project};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/train")
}

pub fn load_corpus() -> Project {
    Project::load(corpus_dir()).expect("corpus loads")
}

/// A writable copy of the corpus, for tests that derive VOs.
pub fn copy_corpus() -> tempfile::TempDir {
    let dir = tempfile::tempdir().expect("tempdir");
    copy_tree(&corpus_dir(), dir.path());
    dir
}

fn copy_tree(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let path = entry.unwrap().path();
        let target = to.join(path.file_name().unwrap());
        if path.is_dir() {
            copy_tree(&path, &target);
        } else {
            std::fs::copy(&path, &target).unwrap();
        }
    }
}

/// All corpus files with the given extension.
pub fn corpus_files(ext: &str) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![corpus_dir()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == ext) {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

pub fn machine_mut<'a>(p: &'a mut Project, name: &str) -> &'a mut Machine {
    &mut p
        .machines
        .iter_mut()
        .find(|m| m.item.name == name)
        .unwrap_or_else(|| panic!("no machine {name}"))
        .item
}

/// Replaces `from` by `to` in a corpus file and reloads that context or
/// machine into `p`. Panics if `from` does not occur.
pub fn mutate(p: &mut Project, file: &str, from: &str, to: &str) {
    let text = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
    assert!(text.contains(from), "`{from}` not found in {file}");
    let text = text.replacen(from, to, 1);
    if file.ends_with(".ctx") {
        p.put_context(vok_core::parser::parse_context(&text).expect("mutated context parses"));
    } else {
        p.put_machine(vok_core::parser::parse_machine(&text).expect("mutated machine parses"));
    }
}
