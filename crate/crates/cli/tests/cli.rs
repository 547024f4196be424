use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn glued(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_glued"));
    cmd.args(args).env_remove("GLUED_CONFIG");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("glued-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn body(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let o = glued(&["heat", "--bogus"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(glued(&[], &[]).status.code(), Some(2));
    assert_eq!(glued(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn bad_configuration_exits_2() {
    let dir = scratch("bad");
    let out = dir.to_str().unwrap();
    assert_eq!(glued(&["specfun-check", "--d", "1.5", "--out", out], &[]).status.code(), Some(2));
    assert_eq!(glued(&["simulate", "--suite", "exit", "--ci", "--out", out], &[]).status.code(), Some(2));
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "not_a_key = 1\n").unwrap();
    assert_eq!(glued(&["specfun-check", "--out", out], &[("GLUED_CONFIG", &cfg)]).status.code(), Some(2));
    assert_eq!(glued(&["hardy", "--suite", "rh", "--threads", "0", "--out", out], &[]).status.code(), Some(2));
}

#[test]
fn assembly_passes_and_writes_csv() {
    let dir = scratch("assembly");
    let o = glued(&["heat", "--suite", "assembly", "--d", "3", "--out", dir.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.join("heat-assembly-assembly.csv")).unwrap();
    assert!(csv.contains("# d=3.0\n"));
    assert!(csv.lines().any(|l| l == "t,y,max_rel_dev,worst_x"));
    assert!(dir.join("heat-assembly.json").exists());
}

#[test]
fn flags_override_the_config_file_and_bodies_repeat() {
    let dir = scratch("precedence");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "d = 4.0\nrh_intervals = 500\nhardy_seed = 9\n").unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for target in [&a, &b] {
        let o = glued(&["hardy", "--suite", "rh", "--d", "3.5", "--out", target.to_str().unwrap()], &[("GLUED_CONFIG", &cfg)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.contains("# d=3.5\n") && text.contains("# rh_intervals=500\n") && text.contains("# hardy_seed=9\n"));
    assert_eq!(body(&a), body(&b));
}

#[test]
fn explicit_csv_target_and_negative_start() {
    let dir = scratch("sim");
    let target = dir.join("exit.csv");
    let o = glued(
        &["simulate", "--suite", "exit", "--x0", "-2", "--paths", "2000", "--seed", "3", "--threads", "1", "--ci", "--out", target.to_str().unwrap()],
        &[],
    );
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("# threads=1\n") && text.contains("# x0=[-2.0]\n"));
    assert!(body(&target).lines().nth(1).unwrap().starts_with("3,-2,3,2000,"));
}
