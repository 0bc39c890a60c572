use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_memnet"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn grid_config_reports_oracle_match() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(config("grid_shortest_path.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("path hops = 10, matches oracle: true"), "{text}");
    for f in ["snapshot.json", "summary.json", "oracle.json", "trace.csv", "network.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let svg = dir.path().join("map.svg");
    let status = bin()
        .arg("render")
        .arg(dir.path().join("snapshot.json"))
        .arg("--out")
        .arg(&svg)
        .arg("--currents")
        .status()
        .unwrap();
    assert!(status.success());
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn healing_config_heals() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--format", "structured", "--config"])
        .arg(config("healing.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["headline"]
        .as_str()
        .unwrap()
        .starts_with("healed path valid in damaged graph: true"));
}

#[test]
fn malformed_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(config("grid_shortest_path.toml")).unwrap();
    std::fs::write(&bad, text.replace("cols = 11", "colums = 11")).unwrap();
    let out = bin().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colums"));
}

#[test]
fn disconnected_terminals_exit_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cut.toml");
    std::fs::write(
        &cfg,
        r#"
name = "cut"
[network]
kind = "grid"
rows = 3
cols = 3
[algorithm]
kind = "heal"
input = { row = 0, col = 0 }
output = { row = 2, col = 2 }
amplitude = 6.0
damage = [
  { from = { row = 0, col = 0 }, to = { row = 0, col = 1 } },
  { from = { row = 0, col = 0 }, to = { row = 1, col = 0 } },
]
"#,
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn batch_and_generate_use_seed_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        r#"
name = "small"
[network]
kind = "random"
n_scale = 8
[device]
memory_ratio = 100.0
[algorithm]
kind = "shortest_path"
input = { x = 1.0, y = 4.0 }
output = { x = 7.0, y = 4.0 }
amplitude = {}
[sim]
record_stride = 0
[output]
render = false
"#,
    )
    .unwrap();
    let status = bin()
        .args(["batch", "--seeds", "1,2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert!(status.success());
    for s in [1, 2] {
        assert!(dir.path().join(format!("b/seed-{s}/summary.json")).exists());
    }
    let status = bin()
        .args(["generate", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("g"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("g/snapshot.json").exists());
}
