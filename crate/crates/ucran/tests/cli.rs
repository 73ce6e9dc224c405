use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ucran"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn ucran(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ucran")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bundled_configs_validate() {
    for name in ["hotspot_table.cfg", "disaster.cfg", "terrain.cfg"] {
        let o = ucran(&["validate", "--config", bundled(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}

#[test]
fn config_errors_exit_1_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "[scenario]\nseed = 2\n\n[traffic]\nmean_holding_s = -3.0\n").unwrap();
    let o = ucran(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.cfg:5:"), "{}", stderr(&o));

    std::fs::write(&path, "[scenario]\nsede = 2\n").unwrap();
    let o = ucran(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.cfg:2:"), "{}", stderr(&o));

    let o = ucran(&["sweep", "--seeds", "5..2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_config_runs_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cfg");
    std::fs::write(&path, "").unwrap();
    let o = ucran(&["validate", "--config", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("hotspot / ucran"));
}

#[test]
fn run_writes_trace_record_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = ucran(&[
        "run",
        "--config",
        bundled("disaster.cfg").to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "txt",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = std::fs::read(out.join("disaster_ucran_s4.trace")).unwrap();
    let digest: String = Sha256::digest(&trace).iter().map(|b| format!("{b:02x}")).collect();
    assert!(stdout(&o).contains(&format!("digest={digest}")));
    let record = std::fs::read_to_string(out.join("disaster_ucran_s4.toml")).unwrap();
    assert!(record.contains(&digest));
    assert!(record.contains("[config.disaster]"));
    let report = std::fs::read_to_string(out.join("disaster_s4_results.txt")).unwrap();
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn run_all_architectures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, "[scenario]\nduration_s = 120.0\n").unwrap();
    let o = ucran(&["run", "--config", cfg.to_str().unwrap(), "--arch", "all", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("hotspot_s1_results.csv")).unwrap();
    let archs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(archs, ["macro", "cran", "ucran"]);
}

#[test]
fn sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "[scenario]\nduration_s = 120.0\n\n[traffic]\nload_fractions = [0.2, 0.6, 1.0]\n").unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = ucran(&["sweep", "--config", cfg.to_str().unwrap(), "--seeds", "1..2", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(out.join("results.csv")).unwrap());
        let record = std::fs::read_to_string(out.join("sweep.toml")).unwrap();
        assert_eq!(record.matches("[[runs]]").count(), 18);
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(String::from_utf8_lossy(&files[0]).lines().count(), 1 + 9);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, "[scenario]\nduration_s = 10.0\n").unwrap();
    let o = ucran(&["run", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn oracle_prints_closed_forms() {
    let o = ucran(&["oracle", "erlang-b", "--servers", "4", "--erlangs", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("blocking=0.0952380952"), "{}", stdout(&o));
    let o = ucran(&["oracle", "mm1", "--lambda", "50", "--mu", "100"]);
    assert!(stdout(&o).contains("sojourn_s=0.02 in_system=1"), "{}", stdout(&o));
    let o = ucran(&["oracle", "mm1", "--lambda", "100", "--mu", "50"]);
    assert_eq!(o.status.code(), Some(2));
}
