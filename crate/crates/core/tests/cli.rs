//! Exit codes and help text of the `unmark` binary.

use std::path::Path;
use std::process::{Command, Output};

use unmark_core::config::Config;

fn unmark(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unmark"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn help_lists_every_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = unmark(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for (key, value) in Config::default().entries() {
        assert!(text.contains(&format!("{key} = {value}")), "help misses {key}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&unmark(d, &["gen-states", "--count", "x", "--out", "s.jsonl"])), 1);
    assert_eq!(code(&unmark(d, &["no-such-command"])), 1);
    std::fs::write(d.join("bad.cfg"), "warp_speed = 9\n").unwrap();
    let args = ["--config", "bad.cfg", "gen-states", "--out", "s.jsonl"];
    assert_eq!(code(&unmark(d, &args)), 1);
    assert!(!d.join("s.jsonl").exists());
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), "{").unwrap();
    assert_eq!(code(&unmark(d, &["decide", "--state", "bad.json", "--unmarker", "3"])), 2);
    std::fs::write(d.join("bad.csv"), "label,f000\n1,0.5\n").unwrap();
    let args = ["train", "--data", "bad.csv", "--out", "m.json"];
    assert_eq!(code(&unmark(d, &args)), 2);
    let args = ["gen-data", "--states", "missing.jsonl", "--out", "d.csv"];
    assert_eq!(code(&unmark(d, &args)), 2);
}

#[test]
fn config_file_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = |out: &str, cfg: Option<&str>| {
        let mut args = Vec::new();
        if let Some(c) = cfg {
            args.extend(["--config", c]);
        }
        args.extend(["gen-states", "--seed", "4", "--count", "20", "--out", out]);
        assert_eq!(code(&unmark(d, &args)), 0);
        std::fs::read(d.join(out)).unwrap()
    };
    std::fs::write(d.join("wide.cfg"), "# spread everyone out\nteammate_spread = 20\n").unwrap();
    assert_eq!(gen("a.jsonl", None), gen("b.jsonl", None));
    assert_ne!(gen("a.jsonl", None), gen("c.jsonl", Some("wide.cfg")));
}
