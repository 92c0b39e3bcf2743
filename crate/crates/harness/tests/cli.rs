use std::path::Path;
use std::process::Command;

use flock_harness::acceptance::{bootstrap_scenario, steering_scenario};
use flock_harness::batch::run_batch;
use flock_harness::plot::render_svg;
use flock_harness::run_scenario;

fn write_scenarios(dir: &Path) {
    for (name, l) in [
        ("a_boot", bootstrap_scenario(4, 6)),
        ("b_boot", bootstrap_scenario(9, 7)),
        ("c_steer", steering_scenario(2, 8, 3)),
    ] {
        std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&l.scenario).unwrap()).unwrap();
    }
    std::fs::write(dir.join("notes.txt"), "not a scenario").unwrap();
}

fn flock() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flock"))
}

#[test]
fn batch_rows_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    write_scenarios(dir.path());
    let one = run_batch(dir.path(), 1, Some(&dir.path().join("one"))).unwrap();
    let four = run_batch(dir.path(), 4, Some(&dir.path().join("four"))).unwrap();
    assert_eq!(one.len(), 3);
    let names: Vec<_> = one.iter().map(|r| r.scenario.as_str()).collect();
    assert_eq!(names, ["a_boot", "b_boot", "c_steer"]);
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    for r in &one {
        assert!(r.pass, "{r:?}");
        let a = std::fs::read(dir.path().join("one").join(format!("{}.jsonl", r.scenario))).unwrap();
        let b = std::fs::read(dir.path().join("four").join(format!("{}.jsonl", r.scenario))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn run_then_check_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write_scenarios(dir.path());
    let sc = dir.path().join("c_steer.json");
    let trace = dir.path().join("t.jsonl");
    let verdicts = dir.path().join("v.json");
    let plot = dir.path().join("p.svg");
    let metrics = dir.path().join("m.json");
    let st = flock()
        .args(["run", "--scenario"])
        .arg(&sc)
        .arg("--trace")
        .arg(&trace)
        .arg("--verdicts")
        .arg(&verdicts)
        .arg("--plot")
        .arg(&plot)
        .arg("--metrics")
        .arg(&metrics)
        .output()
        .unwrap();
    assert!(st.status.success());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(m["waypoints_consumed"], 3);
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("<svg"));
    let out = flock().args(["check", "--trace"]).arg(&trace).arg("--scenario").arg(&sc).output().unwrap();
    assert!(out.status.success());
    let recheck: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let first: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&verdicts).unwrap()).unwrap();
    assert_eq!(recheck, first);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut sc = bootstrap_scenario(1, 5).scenario;
    sc.motion.h = 0.5;
    sc.motion.k = 1.0;
    std::fs::write(&bad, serde_json::to_string(&sc).unwrap()).unwrap();
    let out = flock().args(["run", "--scenario"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsafe parameters"));

    // A tampered trace fails the check.
    let good = dir.path().join("good.json");
    std::fs::write(&good, serde_json::to_string(&bootstrap_scenario(1, 5).scenario).unwrap()).unwrap();
    let trace = dir.path().join("t.jsonl");
    assert!(flock().args(["run", "--scenario"]).arg(&good).arg("--trace").arg(&trace).output().unwrap().status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let k = lines.iter().rposition(|e| e["kind"] == "arrive").unwrap();
    let x = lines[k]["to"][0].as_f64().unwrap();
    lines[k]["to"][0] = (x + 50.0).into();
    let tampered: String = lines.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&trace, tampered).unwrap();
    let st = flock().args(["check", "--trace"]).arg(&trace).arg("--scenario").arg(&good).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn svg_has_one_track_per_robot() {
    let l = bootstrap_scenario(6, 6);
    let out = run_scenario(&l).unwrap();
    let svg = render_svg(&out.trace, &l.params);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("stroke-width=\"1.2\"").count(), 6);
    assert!(svg.contains("stroke-dasharray"));
    assert!(!svg.contains("NaN"));
}
