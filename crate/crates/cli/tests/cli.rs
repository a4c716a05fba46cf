use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vo2osc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vo2osc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("VO2_OSC_SEED")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

const SHORT: [&str; 2] = ["--set", "sim.duration=0.05"];

#[test]
fn usage_errors_exit_2_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["single", "--config", "/nonexistent/net.json"],
        vec!["cpg", "gallop"],
        vec!["coupled", "--coupling", "r:3k", "--coupling", "r:5k@1-0"],
        vec!["sweep", "r", "3k:1k:log3"],
        vec!["single", "--set", "bogus=1"],
        vec!["single", "--preset", "no-such-preset"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("case{k}"));
        let o = vo2osc(args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{args:?} wrote outputs");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = vo2osc(&["single", SHORT[0], SHORT[1]], dir);
        assert!(o.status.success());
    }
    for name in ["waveform.csv", "events.csv", "spectrum.csv", "peak_metrics.json", "dynamic_iv.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn manifest_lists_written_files() {
    let tmp = TempDir::new().unwrap();
    let o = vo2osc(&["single", SHORT[0], SHORT[1]], tmp.path());
    assert!(o.status.success());
    let m = manifest(tmp.path());
    assert_eq!(m["command"], "single");
    assert_eq!(m["overrides"][0]["key"], "sim.duration");
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 5);
    for f in outputs {
        assert!(tmp.path().join(f.as_str().unwrap()).is_file(), "{f}");
    }
}

#[test]
fn seed_from_environment() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &Path, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vo2osc"));
        cmd.args(["single", SHORT[0], SHORT[1], "--out"]).arg(dir);
        match seed {
            Some(s) => cmd.env("VO2_OSC_SEED", s),
            None => cmd.env_remove("VO2_OSC_SEED"),
        };
        cmd.output().unwrap()
    };
    let (base, seeded) = (tmp.path().join("base"), tmp.path().join("seeded"));
    assert!(run(&base, None).status.success());
    assert!(run(&seeded, Some("12345")).status.success());
    let m = manifest(&seeded);
    assert_eq!(m["seed"], 12345);
    assert_eq!(m["seed_from_env"], 12345);
    assert!(manifest(&base).get("seed_from_env").is_none());
    assert_ne!(read(&base, "events.csv"), read(&seeded, "events.csv"));
    let bad = run(&tmp.path().join("bad"), Some("minus one"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cpg_trot_is_recognised() {
    let tmp = TempDir::new().unwrap();
    let o = vo2osc(&["cpg", "trot"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&read(tmp.path(), "gait_report.json")).unwrap();
    assert_eq!(report["classification"]["name"], "TROT", "{report}");
}

#[test]
fn analyze_reproduces_single_spectrum() {
    let tmp = TempDir::new().unwrap();
    let (run, again) = (tmp.path().join("run"), tmp.path().join("again"));
    assert!(vo2osc(&["single", SHORT[0], SHORT[1]], &run).status.success());
    let wave = run.join("waveform.csv");
    let events = run.join("events.csv");
    let o = vo2osc(
        &["analyze", wave.to_str().unwrap(), "--events", events.to_str().unwrap()],
        &again,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&run, "spectrum.csv"), read(&again, "spectrum_osc0.csv"));
    let single: Value = serde_json::from_str(&read(&run, "peak_metrics.json")).unwrap();
    let analyzed: Value = serde_json::from_str(&read(&again, "peak_metrics.json")).unwrap();
    assert_eq!(single["f1"], analyzed[0]["f1"]);
}

#[test]
fn sweep_writes_table_and_boundaries() {
    let tmp = TempDir::new().unwrap();
    let o = vo2osc(
        &["sweep", "r", "2k,10k", "--set", "sim.duration=0.12", "--jobs", "1"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "sweep.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param,f1_osc0,f1_osc1,delta_phi_deg,regime"));
    assert_eq!(lines.count(), 2);
    let b: Value = serde_json::from_str(&read(tmp.path(), "boundaries.json")).unwrap();
    assert_eq!(b["kind"], "resistive");
}
