use std::fs;
use std::path::{Path, PathBuf};

use assert_cmd::Command;
use precsched::deadline_sched::DeadlineInstance;
use precsched::gap_lab::SingleMachineInstance;
use precsched::{Instance, Schedule};
use tempfile::TempDir;

fn bin() -> Command {
    Command::cargo_bin("precsched").unwrap()
}

fn run(dir: &Path, args: &[&str]) -> assert_cmd::assert::Assert {
    bin().current_dir(dir).args(args).assert()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn stdout_of(a: &assert_cmd::assert::Assert) -> String {
    String::from_utf8(a.get_output().stdout.clone()).unwrap()
}

#[test]
fn gaps_ab_row() {
    let d = TempDir::new().unwrap();
    let a = run(d.path(), &["gaps", "--family", "AB", "--m", "2"]).success();
    let out = stdout_of(&a);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row, ["AB", "m=2", "3", "4", "4", "4/3", "1/1", "4/3"]);
}

#[test]
fn gaps_json_has_the_ratio() {
    let d = TempDir::new().unwrap();
    let a = run(d.path(), &["gaps", "--family", "ab", "--m", "2", "--json"]).success();
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!(v["a"], 3);
    assert_eq!(v["b"], 4);
    assert_eq!(v["b_over_a"], "4/3");
}

#[test]
fn validate_empty_schedule_exits_zero() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["gen", "dag", "--seed", "1", "--out", "i.json"]).success();
    fs::write(path(&d, "s.json"), "{\"horizon\": 0}").unwrap();
    run(d.path(), &["validate", "--instance", "i.json", "--schedule", "s.json"]).code(0);
}

#[test]
fn validate_flags_a_capacity_clash() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["gen", "gap", "--family", "AB", "--m", "2", "--out", "i.json"]).success();
    let s = r#"{"horizon": 1, "assignments": [
        {"job": "j0", "index": 1, "machine": 1, "slot": 1},
        {"job": "j1", "index": 1, "machine": 1, "slot": 1}]}"#;
    fs::write(path(&d, "s.json"), s).unwrap();
    let a = run(d.path(), &["validate", "--instance", "i.json", "--schedule", "s.json"]).code(1);
    assert!(stdout_of(&a).contains("capacity"));
}

#[test]
fn verify_sa_exhaustive_passes() {
    let d = TempDir::new().unwrap();
    let a = run(d.path(), &["verify-sa", "--L1", "4", "--eps-prime", "1/4", "--q", "1", "--exhaustive"]).code(0);
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    for f in ["scheduled", "congestion", "objective"] {
        assert_eq!(v["families"][f]["failed"], 0, "{f}");
        assert!(v["families"][f]["checked"].as_u64().unwrap() > 0);
    }
    assert_eq!(v["preconditions"]["q_le_eps_L1"], true);
}

#[test]
fn usage_errors_exit_two() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["nonsense"]).code(2);
    run(d.path(), &["gaps"]).code(2);
    run(d.path(), &["verify-sa", "--L1", "4", "--eps-prime", "3/2", "--q", "1", "--exhaustive"]).code(2);
    run(d.path(), &["validate", "--instance", "missing.json", "--schedule", "missing.json"]).code(2);
    run(d.path(), &["schedule", "--instance", "x.json", "--algo", "hierarchy", "--k", "9"]).code(2);
}

#[test]
fn caps_exit_three() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["gen", "dag", "--seed", "2", "--jobs", "4", "--out", "i.json"]).success();
    run(d.path(), &["oracle", "--instance", "i.json", "--max-tasks", "1"]).code(3);
    run(d.path(), &["gen", "tree", "--L", "20"]).code(3);
}

#[test]
fn help_lists_exit_codes() {
    let a = bin().arg("--help").assert().success();
    let out = stdout_of(&a);
    assert!(out.contains("Exit codes"));
    for c in ["verify-sa", "export-lp", "report"] {
        assert!(out.contains(c));
    }
}

#[test]
fn seeded_generation_is_reproducible() {
    let d = TempDir::new().unwrap();
    for name in ["a.json", "b.json"] {
        run(d.path(), &["gen", "dag", "--seed", "7", "--jobs", "8", "--delay", "1", "--out", name]).success();
    }
    assert_eq!(fs::read(path(&d, "a.json")).unwrap(), fs::read(path(&d, "b.json")).unwrap());
}

#[test]
fn artifacts_round_trip() {
    let d = TempDir::new().unwrap();
    let dir = d.path();
    run(dir, &["gen", "dag", "--seed", "4", "--jobs", "5", "--out", "i.json"]).success();
    run(dir, &["gen", "witness", "--seed", "4", "--out", "w.json", "--witness-out", "wp.json"]).success();
    run(dir, &["gen", "tree", "--L", "3", "--out", "t.json"]).success();
    run(dir, &["schedule", "--instance", "i.json", "--algo", "graham", "--out", "s.json", "--manifest", "m.json"])
        .success();

    let text = |n: &str| fs::read_to_string(path(&d, n)).unwrap();
    let inst = Instance::from_json(&text("i.json")).unwrap();
    assert_eq!(inst.to_json().trim_end(), text("i.json").trim_end());
    let w = DeadlineInstance::from_json(&text("w.json")).unwrap();
    assert_eq!(w.to_json().trim_end(), text("w.json").trim_end());
    let t = SingleMachineInstance::from_json(&text("t.json")).unwrap();
    assert_eq!(t.to_json().trim_end(), text("t.json").trim_end());
    let s = Schedule::from_json(&text("s.json"), &inst).unwrap();
    assert_eq!(s.to_json(&inst).trim_end(), text("s.json").trim_end());
    let wp = Schedule::from_json(&text("wp.json"), w.instance()).unwrap();
    assert_eq!(wp.to_json(w.instance()).trim_end(), text("wp.json").trim_end());
}

#[test]
fn hidden_witness_fits_windows_and_capacity() {
    let d = TempDir::new().unwrap();
    for seed in 0..5 {
        let seed = seed.to_string();
        run(d.path(), &["gen", "witness", "--seed", &seed, "--out", "w.json", "--witness-out", "wp.json"]).success();
        // The hidden placement respects windows and capacity but may migrate.
        let a = run(d.path(), &["validate", "--deadline", "--instance", "w.json", "--schedule", "wp.json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
        for viol in v["violations"].as_array().unwrap() {
            assert_ne!(viol["kind"], "capacity");
        }
        let err = String::from_utf8(a.get_output().stderr.clone()).unwrap();
        assert!(!err.contains("outside their window"), "{err}");
    }
}

#[test]
fn every_algorithm_emits_a_valid_schedule() {
    let d = TempDir::new().unwrap();
    let dir = d.path();
    run(dir, &["gen", "dag", "--seed", "5", "--jobs", "4", "--delay", "1", "--out", "i.json"]).success();
    run(dir, &["gen", "witness", "--seed", "5", "--out", "w.json"]).success();
    let cases: [(&str, &str, &str); 5] = [
        ("graham", "i.json", "no-delay"),
        ("graham", "i.json", "delay"),
        ("hierarchy", "i.json", "delay"),
        ("edf-ect", "w.json", "no-delay"),
        ("edf-ect-comm", "w.json", "delay"),
    ];
    let mut manifests = Vec::new();
    for (i, (algo, inst, mode)) in cases.iter().enumerate() {
        let (s, m) = (format!("s{i}.json"), format!("m{i}.json"));
        run(dir, &["schedule", "--instance", inst, "--algo", algo, "--mode", mode, "--out", &s, "--manifest", &m])
            .success();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path(&d, &m)).unwrap()).unwrap();
        assert_eq!(v["valid"], true, "{algo}");
        assert_eq!(v["algorithm"], *algo);
        if *inst == "i.json" {
            run(dir, &["validate", "--instance", inst, "--schedule", &s, "--mode", mode]).success();
        } else {
            run(dir, &["validate", "--deadline", "--instance", inst, "--schedule", &s, "--mode", mode]).success();
        }
        manifests.push(m);
    }
    let mut args = vec!["report".to_string()];
    args.extend(manifests);
    let a = bin().current_dir(dir).args(&args).assert().success();
    let out = stdout_of(&a);
    assert_eq!(out.lines().count(), 6);
    assert!(out.contains("edf-ect-comm"));
}

#[test]
fn export_lp_writes_lp_text() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["gen", "gap", "--family", "AB", "--m", "2", "--out", "i.json"]).success();
    run(d.path(), &["export-lp", "--instance", "i.json", "--horizon", "3", "--out", "a.lp"]).success();
    let lp = fs::read_to_string(path(&d, "a.lp")).unwrap();
    assert!(lp.contains("Subject To"));
    assert!(lp.trim_end().ends_with("End"));
    run(d.path(), &["export-lp", "--instance", "i.json", "--horizon", "0"]).code(2);
}

#[test]
fn oracle_reports_each_model() {
    let d = TempDir::new().unwrap();
    run(d.path(), &["gen", "gap", "--family", "AB", "--m", "2", "--out", "i.json"]).success();
    let a = run(d.path(), &["oracle", "--instance", "i.json"]).success();
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!((v["A"]["value"].as_u64(), v["B"]["value"].as_u64(), v["C"]["value"].as_u64()), (Some(3), Some(4), Some(4)));
    run(d.path(), &["gen", "tree", "--L", "1", "--out", "t.json"]).success();
    let a = run(d.path(), &["oracle", "--smi", "t.json"]).success();
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!(v["value"], 0);
}
