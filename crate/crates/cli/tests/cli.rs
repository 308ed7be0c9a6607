use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use qtraj_cli::{exit_code, run, Command, EXIT_FAILED_CHECK, EXIT_INVALID};
use tempfile::TempDir;

const GROUND: &str = r#"
[state]
kind = "box"
n = 1

[trajectory]
n_samples = 200001
"#;

const PAIR: &str = r#"
[state]
kind = "superposition"
components = [{ n = 1, re = 1.0 }, { n = 2, re = 1.0 }]

[trajectory]
n_samples = 20001
"#;

fn config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn verify_ground_state_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let outcome = run(Command::Verify, &config(&dir, GROUND), Some(&out)).unwrap();
    assert_eq!(outcome.exit_code(), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["pass"]["verify"], true);
    assert!(summary["metrics"]["verify"]["l1"].as_f64().unwrap() < 1e-3);
    assert!(summary["wall_clock_seconds"].as_f64().is_some());
    assert_eq!(summary["config"]["state"]["n"], 1);
    let hist = read(&out.join("histogram.csv"));
    assert!(hist.starts_with("x_lo,x_hi,count,density,target\n"));
    assert_eq!(hist.lines().count(), 51);
}

#[test]
fn verify_against_wrong_state_fails_with_code_3() {
    let dir = TempDir::new().unwrap();
    let text = format!("{GROUND}\n[verify]\ntarget = {{ kind = \"box\", n = 2 }}\n");
    let result = run(Command::Verify, &config(&dir, &text), Some(dir.path()));
    assert_eq!(exit_code(&result), EXIT_FAILED_CHECK);
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("summary.json"))).unwrap();
    assert_eq!(summary["pass"]["verify"], false);
}

#[test]
fn missing_config_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let result = run(
        Command::Synth,
        &dir.path().join("nope.toml"),
        Some(dir.path()),
    );
    assert_eq!(exit_code(&result), EXIT_INVALID);
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let text = "[state]\nkind = \"box\"\nn = 1\nwidth = 2\n";
    let err = run(Command::Synth, &config(&dir, text), Some(dir.path())).unwrap_err();
    assert!(err.0.contains("line 4"), "{err}");
    let text = "[state]\nkind = \"box\"\nn = = 1\n";
    let err = run(Command::Synth, &config(&dir, text), Some(dir.path())).unwrap_err();
    assert!(err.0.contains("line 3"), "{err}");
}

#[test]
fn semantic_errors_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    for text in [
        "[state]\nkind = \"box\"\n",
        "[state]\nkind = \"box\"\nn = 1\n[params]\nperiod = -1.0\n",
        "[state]\nkind = \"box\"\nn = 1\n[trajectory]\nt0 = 0.0\nt0_seed = 3\n",
        "[state]\nkind = \"superposition\"\n",
    ] {
        let result = run(Command::Synth, &config(&dir, text), Some(dir.path()));
        assert_eq!(exit_code(&result), EXIT_INVALID, "{text}");
    }
    let result = run(Command::Momentum, &config(&dir, PAIR), Some(dir.path()));
    assert_eq!(exit_code(&result), EXIT_INVALID);
}

#[test]
fn every_command_writes_its_series() {
    let cases = [
        (Command::Synth, GROUND, vec!["trajectory.csv"]),
        (
            Command::Marginal,
            PAIR,
            vec!["marginal.csv", "trajectory.csv"],
        ),
        (Command::Momentum, GROUND, vec!["phi.csv"]),
        (Command::Potential, GROUND, vec!["vbar.csv"]),
        (Command::Potential, PAIR, vec!["vbar.csv"]),
        (Command::Bohm, GROUND, vec!["comparison.csv"]),
        (Command::Bohm, PAIR, vec!["comparison.csv"]),
        (
            Command::Ensemble,
            GROUND,
            vec!["trajectories.csv", "t0.csv"],
        ),
    ];
    for (command, text, files) in cases {
        let dir = TempDir::new().unwrap();
        let outcome = run(command, &config(&dir, text), Some(dir.path())).unwrap();
        assert_eq!(outcome.exit_code(), 0, "{command}");
        for f in files.iter().chain(&["summary.json"]) {
            let body = read(&dir.path().join(f));
            assert!(
                !body.contains("NaN") && !body.contains("nan"),
                "{command} {f}"
            );
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let text = format!("{GROUND}\nsampling = \"random\"\nseed = 5\nt0_seed = 9\n[ensemble]\nmembers = 4\nseed = 3\n");
    for command in [
        Command::Verify,
        Command::Ensemble,
        Command::Bohm,
        Command::Momentum,
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        let first = run(command, &config(&a, &text), Some(a.path())).unwrap();
        run(command, &config(&b, &text), Some(b.path())).unwrap();
        for f in first
            .files
            .iter()
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        {
            let name = f.file_name().unwrap();
            assert_eq!(
                fs::read(f).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{command} {name:?}"
            );
        }
    }
}

#[test]
fn tabulated_state_from_csv() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x,re,im\n");
    for i in 0..=256 {
        let x = -0.5 + i as f64 / 256.0;
        let a = 2f64.sqrt() * (std::f64::consts::PI * x).cos();
        csv.push_str(&format!("{x},{a},0\n"));
    }
    fs::write(dir.path().join("psi.csv"), csv).unwrap();
    let text =
        "[state]\nkind = \"tabulated\"\npath = \"psi.csv\"\n[trajectory]\nn_samples = 100001\n";
    let outcome = run(
        Command::Verify,
        &config(&dir, text),
        Some(&dir.path().join("out")),
    )
    .unwrap();
    assert_eq!(outcome.exit_code(), 0);

    fs::write(dir.path().join("psi.csv"), "x,re,im\n0,1,0\n0.5,oops,0\n").unwrap();
    let err = run(Command::Synth, &config(&dir, text), Some(dir.path())).unwrap_err();
    assert!(err.0.contains("psi.csv:3"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_qtraj");
    let ok = Process::new(bin)
        .args([
            "synth",
            config(&dir, GROUND).to_str().unwrap(),
            "--quiet",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
    let missing = Process::new(bin)
        .args(["synth", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read config"));
}
