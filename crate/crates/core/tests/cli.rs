use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_symmeq"));
    c.env_remove("SYMMEQ_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Small, fast training config.
fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("toy.json");
    std::fs::write(
        &path,
        r#"{
  "num_envs": 4,
  "horizon": 16,
  "iterations": 3,
  "checkpoint_interval": 2,
  "widths": {"actor": [16], "critic": [16], "encoder": [16, 8]},
  "ppo": {"minibatches": 2, "epochs": 2}
}"#,
    )
    .unwrap();
    path
}

fn train(dir: &Path, variant: &str, out: &str) -> PathBuf {
    let cfg = write_config(dir);
    let out = dir.join(out);
    let o = run(&[
        "train",
        "--config",
        p(&cfg),
        "--variant",
        variant,
        "--seed",
        "0",
        "--out",
        p(&out),
        "--deterministic",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn csv_hashes(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == "run_hash").expect("run_hash column");
    r.records().map(|x| x.unwrap()[idx].to_string()).collect()
}

#[test]
fn train_writes_manifest_and_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let a = train(t.path(), "se-policy", "a");
    let b = train(t.path(), "se-policy", "b");
    let ma = std::fs::read(a.join("metrics.csv")).unwrap();
    assert_eq!(ma, std::fs::read(b.join("metrics.csv")).unwrap());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["variant"], "se-policy");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["final_metrics"]["iteration"], 3);
    let hash = m["run_hash"].as_str().unwrap();
    assert!(csv_hashes(&a.join("metrics.csv")).iter().all(|h| h == hash));
    assert!(a.join("checkpoint_2.json").exists() && a.join("checkpoint_3.json").exists());
    let svg = std::fs::read_to_string(a.join("training_return.svg")).unwrap();
    assert!(svg.contains(hash));
    let listed: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(listed.contains(&"training_symmetry.svg"), "{listed:?}");
}

#[test]
fn multiple_seeds_get_their_own_directories() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path());
    let out = t.path().join("multi");
    let o = run(&["train", "--config", p(&cfg), "--seeds", "3,4", "--iterations", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for s in [3, 4] {
        let m = std::fs::read_to_string(out.join(format!("seed_{s}")).join("manifest.json")).unwrap();
        assert!(m.contains(&format!("\"seed\": {s}")));
    }
}

#[test]
fn unknown_variant_is_a_usage_error() {
    let o = run(&["train", "--variant", "mirror-net"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    for v in ["se-policy", "se-actor-only", "vanilla", "vanilla-regu"] {
        assert!(e.contains(v), "{e}");
    }
}

#[test]
fn invalid_config_reports_field_path() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("bad.json");
    std::fs::write(&cfg, r#"{"ppo": {"clip": "wide"}}"#).unwrap();
    let o = run(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ppo.clip"), "{}", stderr(&o));
    std::fs::write(&cfg, r#"{"env": {"gait_periode": 0.8}}"#).unwrap();
    let o = run(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("env"), "{}", stderr(&o));
    assert!(stderr(&o).contains("gait_periode"), "{}", stderr(&o));
}

#[test]
fn eval_presets_and_errors() {
    let t = tempfile::tempdir().unwrap();
    let run_dir = train(t.path(), "se-policy", "se");
    let ckpt = run_dir.join("checkpoint_3.json");
    let cfg = write_config(t.path());

    let ev = t.path().join("ev");
    let o = run(&["eval", p(&ckpt), "--config", p(&cfg), "--episodes", "4", "--out", p(&ev), "--deterministic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ev.join("report.json")).unwrap()).unwrap();
    assert!(report["spat_s"]["mean"].as_f64().unwrap() < 1e-10);
    for f in ["report.csv", "error_curves.csv", "te_p.svg", "te_o.svg", "manifest.json"] {
        assert!(ev.join(f).exists(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(ev.join("manifest.json")).unwrap()).unwrap();
    let hash = m["run_hash"].as_str().unwrap();
    assert!(csv_hashes(&ev.join("report.csv")).iter().all(|h| h == hash));
    assert!(std::fs::read_to_string(ev.join("te_p.svg")).unwrap().contains(hash));

    let ev2 = t.path().join("ev2");
    let o = run(&["eval", p(&ckpt), "--config", p(&cfg), "--episodes", "4", "--out", p(&ev2), "--deterministic"]);
    assert_eq!(code(&o), 0);
    for f in ["report.csv", "error_curves.csv"] {
        assert_eq!(std::fs::read(ev.join(f)).unwrap(), std::fs::read(ev2.join(f)).unwrap(), "{f}");
    }

    let ed = t.path().join("ed");
    let o = run(&["eval", p(&ckpt), "--config", p(&cfg), "--preset", "eight-dir", "--out", p(&ed)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let names: Vec<String> = std::fs::read_dir(&ed)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("dir_") && n.ends_with(".csv")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.starts_with("eight_dir") && n.ends_with(".svg")).count(), 1);

    let o = run(&["eval", p(&ckpt), "--config", p(&cfg), "--episodes", "0"]);
    assert_eq!(code(&o), 2);
    let o = run(&["eval", p(&ckpt), "--config", p(&cfg), "--profile", "g1", "--out", p(&t.path().join("x"))]);
    assert_ne!(code(&o), 0);
    let wide = t.path().join("wide.json");
    std::fs::write(&wide, r#"{"env": {"k": 3}}"#).unwrap();
    let o = run(&["eval", p(&ckpt), "--config", p(&wide), "--out", p(&t.path().join("y"))]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("does not match"), "{}", stderr(&o));
    let o = run(&["eval", p(&ckpt), "--preset", "spiral"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_fresh_profiles_pass() {
    for profile in ["toy", "g1"] {
        let o = run(&["verify", "--profile", profile]);
        assert_eq!(code(&o), 0, "{profile}: {}{}", stdout(&o), stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("actor equivariance") && out.contains("critic invariance"));
        assert!(!out.contains("FAIL"));
    }
    let o = run(&["verify", "--profile", "g1"]);
    assert!(stdout(&o).contains("reference table rows"));
    let o = run(&["verify", "--profile", "toy"]);
    assert!(stdout(&o).contains("env transition mirror consistency"));
    let o = run(&["verify", "--profile", "humanoid"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_checkpoints() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path());
    let se = train(t.path(), "se-policy", "se").join("checkpoint_3.json");
    let o = run(&["verify", p(&se), "--config", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let van = train(t.path(), "vanilla", "van").join("checkpoint_3.json");
    let o = run(&["verify", p(&van), "--config", p(&cfg)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("expected-fail"));

    // A vanilla network labelled as an equivariant variant must fail.
    let text = std::fs::read_to_string(&van).unwrap();
    let forged = t.path().join("forged.json");
    std::fs::write(&forged, text.replace("\"variant\":\"vanilla\"", "\"variant\":\"se-policy\"")).unwrap();
    let o = run(&["verify", p(&forged), "--config", p(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("actor equivariance"), "{}", stderr(&o));
    assert!(stderr(&o).contains("max residual"));
}

#[test]
fn rollout_plot_and_output_root() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path());
    let ckpt = train(t.path(), "se-policy", "se").join("checkpoint_3.json");
    let root = t.path().join("root");
    let o = bin()
        .env("SYMMEQ_OUT", &root)
        .args(["rollout", p(&ckpt), "--config", p(&cfg), "--episodes", "2", "--out", "traj"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = root.join("traj");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for i in 0..2 {
        let hashes = csv_hashes(&dir.join(format!("trajectory_{i}.csv")));
        assert!(!hashes.is_empty());
        assert!(hashes.iter().all(|h| h == m["run_hash"].as_str().unwrap()));
    }

    let run_dir = t.path().join("se");
    for f in ["training_return.svg", "training_symmetry.svg"] {
        let _ = std::fs::remove_file(run_dir.join(f));
    }
    let o = run(&["plot", p(&run_dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = std::fs::read_to_string(run_dir.join("training_return.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let o = run(&["plot", p(&t.path().join("missing"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn in_process_entry_point_matches_binary() {
    assert_eq!(symmeq::cli::run(["symmeq", "--help"]), 0);
    assert_eq!(symmeq::cli::run(["symmeq", "train", "--variant", "nope"]), 2);
    assert_eq!(symmeq::cli::run(["symmeq", "frobnicate"]), 2);
}

/// The CLI only parses, resolves paths and forwards to library jobs: it
/// imports nothing from the numeric, network, environment or symmetry
/// modules, and the only library items it calls are the job entry points.
#[test]
fn cli_is_dispatch_only() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/cli/mod.rs")).unwrap();
    let code: String = src.lines().filter(|l| !l.trim_start().starts_with("//")).collect::<Vec<_>>().join("\n");
    for forbidden in [
        "crate::numerics",
        "crate::eqnn",
        "crate::env",
        "crate::symmetry",
        "Tensor",
        "Graph",
        "evaluate(",
        "rl::train(",
        " train(",
    ] {
        assert!(!code.contains(forbidden), "cli references {forbidden}");
    }
    let imports: Vec<&str> = src.lines().filter(|l| l.starts_with("use crate::")).collect();
    assert_eq!(imports.len(), 2, "{imports:?}");
    assert!(imports.iter().all(|l| l.starts_with("use crate::rl::") || l.starts_with("use crate::metrics::replot_dir")));
    let bin = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/bin/symmeq.rs")).unwrap();
    assert!(bin.lines().count() <= 5);
}
