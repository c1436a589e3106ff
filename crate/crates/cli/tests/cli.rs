//! The `vok` binary on the train corpus: output and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/train")
}

fn vok(project: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vok"))
        .arg("--project")
        .arg(project)
        .args(args)
        .output()
        .expect("vok runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
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

#[test]
fn check_succeeds_on_the_corpus() {
    let o = vok(&corpus(), &["check"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn model_checking_reports_the_space_size() {
    let o = vok(&corpus(), &["mc", "train_routes", "--fin", "--dlf"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("59049 states"), "{}", stdout(&o));
}

#[test]
fn vo3_passes() {
    let o = vok(&corpus(), &["vo", "run", "VO3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("SPRJ8"));
}

#[test]
fn json_reports_parse() {
    let o = vok(&corpus(), &["--format", "json", "vo", "run", "VO1", "VO2"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["vos"][0]["verdict"], "PASS");
    assert_eq!(json["vos"][1]["name"], "VO2");
}

#[test]
fn a_swapped_trace_fails_at_its_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("swapped.json");
    std::fs::write(
        &trace,
        r#"{"machine": "train_routes", "steps": [
            {"event": "route_formation", "params": {"r": "R2"}},
            {"event": "route_reservation", "params": {"r": "R2"}}]}"#,
    )
    .unwrap();
    let o = vok(
        &corpus(),
        &["replay", "train_routes", trace.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("step 0") && out.contains("disabled"), "{out}");
}

#[test]
fn usage_and_resolution_errors_exit_2() {
    let o = vok(&corpus(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = vok(&corpus(), &["mc", "no_such_machine"]);
    assert_eq!(o.status.code(), Some(2));
    let o = vok(&corpus(), &["vo", "run", "VO9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn projections_print_dot() {
    let o = vok(&corpus(), &["project", "train_routes", "--expr", "rs(R8)"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"), "{dot}");
    assert_eq!(dot.matches(" -> ").count(), 3);
    assert!(!dot.contains("dashed"));
}

#[test]
fn trace_refinement_inserts_block_releases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("refined.json");
    let trace = corpus().join("traces/r2_cycle.json");
    let o = vok(
        &corpus(),
        &[
            "trace-refine",
            "train_routes",
            "train_1_routes",
            trace.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let steps = json["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 10);
    assert_eq!(steps.iter().filter(|s| s["skip"] == true).count(), 7);
}

#[test]
fn derivation_updates_the_vo_file() {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&corpus(), dir.path());
    let o = vok(dir.path(), &["vo", "derive", "VO1", "flatten-refinement"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let vo = std::fs::read_to_string(dir.path().join("vos/train.vo")).unwrap();
    assert!(vo.contains("superseded by VO1.1"), "{vo}");
    let o = vok(dir.path(), &["vo", "run", "VO1.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
