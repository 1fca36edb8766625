use std::path::Path;
use std::process::{Command, Output};

fn ganlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ganlab")).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn em_demo_runs_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ganlab(&["em-demo", "--seed", "1", "--out", out.to_str().unwrap(), "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("EM=5: PASS"));
    for f in ["manifest.json", "em_demo.csv", "em_demo.svg", "em_plan.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn tampered_run_fails_verification_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    assert_eq!(ganlab(&["em-demo", "--seed", "1", "--out", out_s]).status.code(), Some(0));
    let csv = out.join("em_demo.csv");
    let body = std::fs::read_to_string(&csv).unwrap();
    std::fs::write(&csv, body.replace("4,3,0,5", "4,3,0,4")).unwrap();
    let o = ganlab(&["verify", out_s]);
    assert_eq!(o.status.code(), Some(4));
    assert!(text(&o.stdout).contains("EM=5: FAIL"));
}

#[test]
fn missing_files_exit_4_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    assert_eq!(ganlab(&["minimax-sim", "--seed", "1", "--out", out_s]).status.code(), Some(0));
    std::fs::remove_file(out.join("minimax_sim.csv")).unwrap();
    let o = ganlab(&["verify", out_s]);
    assert_eq!(o.status.code(), Some(4));
    assert!(text(&o.stderr).contains("minimax_sim.csv"));
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    let o = ganlab(&["em-demo", "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`seed`"));

    let cfg = write(dir.path(), "bad.toml", "seed = 1\n[sweep]\npionts = 3\n");
    let o = ganlab(&["divergence-sweep", "--config", &cfg, "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("sweep.pionts"));

    let cfg = write(dir.path(), "type.toml", "seed = 1\neta = \"fast\"\n");
    let o = ganlab(&["minimax-sim", "--config", &cfg, "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`eta`"));

    let cfg = write(dir.path(), "dist.toml", "seed = 1\nq = \"cauchy(t, 1)\"\n");
    let o = ganlab(&["divergence-sweep", "--config", &cfg, "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`q`"));
}

#[test]
fn numeric_abort_exits_3_and_keeps_partial_logs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write(
        dir.path(),
        "blowup.toml",
        "seed = 1\nmode = \"vanilla_gan\"\nsteps = 50\n[critic]\noptimizer = \"sgd\"\nlr = 1e200\n",
    );
    let o = ganlab(&["train", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("numeric abort"));
    assert!(out.join("manifest.json").exists());
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("step,mode,"));
}

#[test]
fn seed_flag_overrides_config_and_manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = write(dir.path(), "pl.toml", "seed = 5\nsamples = 300\n");
    let o = ganlab(&["parallel-lines", "--config", &cfg, "--seed", "6", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["params"]["samples"], 300);
    assert!(manifest["non_paper_defaults"].as_array().unwrap().iter().any(|k| k == "bins"));

    let replay = a.join("manifest.json");
    let o = ganlab(&["parallel-lines", "--config", replay.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["parallel_lines.csv", "parallel_lines_empirical.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    assert_eq!(ganlab(&["em-demo", "--seed", "1", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    let m = a.join("manifest.json");
    let o = ganlab(&["minimax-sim", "--config", m.to_str().unwrap(), "--out", dir.path().join("b").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`experiment`"));
}
