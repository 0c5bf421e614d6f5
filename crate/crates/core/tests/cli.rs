//! End-to-end tests of the `chic` binary: exit codes, artifacts, determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

use chic::commands::{exit, CommandOutcome};

fn chic(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_chic"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = "[grid]\nn = 16\n[scheme]\nt_end = 1\nstride = 20\n";

#[test]
fn simulate_writes_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.conf", SMALL);
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        let (code, _, err) = chic(tmp.path(), &["simulate", "--config", cfg, "--seed", "4", "--out", out]);
        assert_eq!(code, exit::OK, "{err}");
    }
    for f in ["diagnostics.csv", "trajectory.csv", "final_state.json", "summary.json", "simulate.plot"] {
        let (a, b) = (tmp.path().join("a").join(f), tmp.path().join("b").join(f));
        assert!(a.exists(), "{f} missing");
        if f.ends_with(".csv") {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{f} differs");
        }
    }
    let diag = std::fs::read_to_string(tmp.path().join("a/diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,mass_total,mass_chi,"));

    // A different seed gives different data.
    let (code, _, _) = chic(tmp.path(), &["simulate", "--config", cfg, "--seed", "5", "--out", "c"]);
    assert_eq!(code, exit::OK);
    assert_ne!(
        std::fs::read(tmp.path().join("a/trajectory.csv")).unwrap(),
        std::fs::read(tmp.path().join("c/trajectory.csv")).unwrap()
    );
}

#[test]
fn json_config_matches_text_config() {
    let tmp = tempfile::tempdir().unwrap();
    let text = write_config(tmp.path(), "c.conf", SMALL);
    let json = write_config(
        tmp.path(),
        "c.json",
        r#"{"grid": {"n": 16}, "scheme": {"t_end": 1, "stride": 20}}"#,
    );
    for (cfg, out) in [(&text, "t"), (&json, "j")] {
        let (code, _, err) = chic(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--out", out]);
        assert_eq!(code, exit::OK, "{err}");
    }
    assert_eq!(
        std::fs::read(tmp.path().join("t/diagnostics.csv")).unwrap(),
        std::fs::read(tmp.path().join("j/diagnostics.csv")).unwrap()
    );
}

#[test]
fn other_commands_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.conf", SMALL);
    let cfg = cfg.to_str().unwrap();
    let cases: [(&str, &[&str], &str); 3] = [
        ("equilibria", &["--override", "params.a=15"], "loja.json"),
        ("decompose", &["--override", "scheme.t_end=2"], "split.csv"),
        ("fit-decay", &["--override", "scheme.t_end=8"], "fit.json"),
    ];
    for (cmd, extra, file) in cases {
        let mut args = vec![cmd, "--config", cfg, "--out", cmd];
        args.extend_from_slice(extra);
        let (code, _, err) = chic(tmp.path(), &args);
        assert_eq!(code, exit::OK, "{cmd}: {err}");
        assert!(tmp.path().join(cmd).join(file).exists(), "{cmd}: {file} missing");
    }
    // fit-decay on an existing diagnostics file.
    let (code, _, err) = chic(tmp.path(), &["simulate", "--config", cfg, "--override", "scheme.t_end=8", "--out", "sim"]);
    assert_eq!(code, exit::OK, "{err}");
    let (code, out, err) = chic(
        tmp.path(),
        &["fit-decay", "--config", cfg, "--override", "fit.input=sim/diagnostics.csv", "--override", "fit.column=norm_q", "--override", "fit.t_min=1", "--out", "fit2"],
    );
    assert_eq!(code, exit::OK, "{err}");
    assert!(out.contains("model"), "{out}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.conf", SMALL);
    let cfg = cfg.to_str().unwrap();
    let config_errors: [&[&str]; 5] = [
        &["simulate", "--config", "missing.conf"],
        &["simulate", "--config", cfg, "--override", "grid.bogus=1"],
        &["simulate", "--config", cfg, "--override", "params.alpha=0"],
        &["simulate", "--config", cfg, "--override", "grid.n=12"],
        &["launch", "--config", cfg],
    ];
    for args in config_errors {
        let (code, _, err) = chic(tmp.path(), args);
        assert_eq!(code, exit::CONFIG, "{args:?}: {err}");
    }
    let bad = write_config(tmp.path(), "bad.conf", "[grid]\nn = sixteen\n");
    let (code, _, err) = chic(tmp.path(), &["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, exit::CONFIG);
    assert!(err.contains("line 2") && err.contains("grid.n"), "{err}");

    // alpha = 0 is accepted once explicitly allowed.
    let (code, _, err) = chic(
        tmp.path(),
        &["simulate", "--config", cfg, "--override", "params.alpha=0", "--override", "run.allow_alpha_zero=true", "--out", "a0"],
    );
    assert_eq!(code, exit::OK, "{err}");

    let (code, _, err) = chic(tmp.path(), &["simulate", "--config", cfg, "--override", "scheme.blowup=1e-9", "--out", "b"]);
    assert_eq!(code, exit::NUMERICAL, "{err}");
    assert!(err.contains("blowup"), "{err}");
    let (code, _, _) = chic(
        tmp.path(),
        &["fit-decay", "--config", cfg, "--override", "fit.input=missing.csv"],
    );
    assert_eq!(code, exit::CONFIG);

    // A verification run with a failing check maps to 4.
    let failed = CommandOutcome { passed: false, ..Default::default() };
    assert_eq!(failed.exit_code(), exit::VERIFICATION);
}
