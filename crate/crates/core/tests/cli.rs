use std::path::Path;
use std::process::{Command, Output};

use fracflow::io::{parse_config, run_scenario, ScenarioKind};

const SMALL_PDE: &str = r#"
scenario = "solve-pde"
seed = 3
alpha = 1.5

[grid]
n = 16

[time]
dt = 0.05
t_end = 0.5
output_stride = 5

[initial]
kind = "gaussians"
components = [{ weight = 1.0, center = [0.0, 0.0], sigma = 0.7 }]

[drift]
kind = "cellular"
amplitude = 0.5
"#;

fn fracflow(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracflow"));
    cmd.args(args).env_remove("FRACFLOW_OUT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn successful_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pde.toml", SMALL_PDE);
    let out = dir.path().join("run");
    let o = fracflow(&["solve-pde", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS velocity-divergence"));
    for f in ["provenance.json", "metrics.csv", "verdicts.jsonl", "report.json", "u.ffd", "checksums.txt"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pde.toml", SMALL_PDE);
    let out = dir.path().join("from-env");
    let o = fracflow(&["solve-pde", "--config", &cfg], &[("FRACFLOW_OUT", &out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("checksums.txt").exists());
}

#[test]
fn invalid_configuration_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cases = [
        ("alpha.toml", SMALL_PDE.replace("alpha = 1.5", "alpha = 2.5"), "alpha"),
        ("unknown.toml", SMALL_PDE.replace("[grid]", "[grid]\nwidth = 3"), "width"),
        ("type.toml", SMALL_PDE.replace("dt = 0.05", "dt = \"fast\""), "time.dt"),
    ];
    for (name, text, needle) in cases {
        let cfg = write(dir.path(), name, &text);
        let o = fracflow(&["solve-pde", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{name}");
    }
    let cfg = write(dir.path(), "pde.toml", SMALL_PDE);
    let o = fracflow(&["solve-sqg", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario"));
}

#[test]
fn runtime_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pde.toml", SMALL_PDE);
    // The output path is an existing regular file, so writing artifacts fails.
    let blocked = write(dir.path(), "blocked", "");
    let o = fracflow(&["solve-pde", "--config", &cfg, "--out", &blocked], &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pde.toml", SMALL_PDE);
    let out = dir.path().join("run");
    let o = fracflow(&["solve-pde", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let prov = std::fs::read_to_string(out.join("provenance.json")).unwrap();
    assert!(prov.contains("\"seed\": 99"));
}

#[test]
fn identical_runs_give_identical_checksums() {
    let cfg = parse_config(SMALL_PDE).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_scenario(&cfg, ScenarioKind::SolvePde, a.path()).unwrap();
    let rb = run_scenario(&cfg, ScenarioKind::SolvePde, b.path()).unwrap();
    assert_eq!(ra.checksums, rb.checksums);
    let listing = |d: &Path| std::fs::read(d.join("checksums.txt")).unwrap();
    assert_eq!(listing(a.path()), listing(b.path()));
}
