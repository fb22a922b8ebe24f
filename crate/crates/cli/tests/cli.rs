use std::path::Path;
use std::process::{Command, Output};

use smadp_cli::output::{read_curves_csv, CURVES_HEADER};

fn smadp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smadp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

const SMALL: &str = r#"
runs = 3
master_seed = 11

[[phases]]
system = "sparse"
iterations = 3

[[algorithms]]
kind = "sm-nlms"
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn small_run_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = smadp(&["run", &cfg, "--out", "res"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let text = std::fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CURVES_HEADER);
    for (i, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "SM-NLMS");
        assert_eq!(fields[1], i.to_string());
        for f in &fields[2..] {
            let mantissa = f.split('e').next().unwrap();
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert!(digits >= 9, "{f}");
        }
    }
    let rows = read_curves_csv(&dir.path().join("res/curves.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    // A fraction of three trials.
    for r in &rows {
        let k = r.updated_frac * 3.0;
        assert!((k - k.round()).abs() < 1e-12);
    }

    let summary = std::fs::read_to_string(dir.path().join("res/curves_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.starts_with("algorithm,phase,system,iterations,steady_mse_db"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out_dir = format!("o{k}");
        let out = smadp(
            &[
                "run", "figure2", "--runs", "40", "--seed", "5", "--out", &out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success());
        outputs.push(std::fs::read(dir.path().join(&out_dir).join("curves.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let out = smadp(
        &[
            "run", "figure2", "--runs", "40", "--seed", "6", "--out", "o2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_ne!(
        std::fs::read(dir.path().join("o2/curves.csv")).unwrap(),
        outputs[0]
    );
}

#[test]
fn svg_flag_writes_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = smadp(&["run", &cfg, "--out", "res", "--svg"], dir.path());
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("res/learning_curves.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "runs = 2\ngamma = -1.0\n");
    let out = smadp(&["run", &bad], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let unknown = write(dir.path(), "unknown.toml", "runz = 2\n");
    assert_eq!(smadp(&["run", &unknown], dir.path()).status.code(), Some(1));

    assert_eq!(
        smadp(&["run", "no-such-file.toml"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smadp(&["run", &bad, "--runs", "0"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smadp(&["describe", "figure9"], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = smadp(&["run", &cfg, "--out", "blocker/res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn presets_and_describe() {
    let dir = tempfile::tempdir().unwrap();
    let out = smadp(&["presets"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["figure1", "figure2", "figure3", "figure4"] {
        assert!(text.contains(name));
    }

    let out = smadp(&["describe", "figure4"], dir.path());
    assert!(out.status.success());
    let described = String::from_utf8(out.stdout).unwrap();
    assert!(described.contains("preset = \"figure4\""));
    assert!(described.contains("kind = \"ar1\""));

    // The description is itself a runnable config.
    let cfg = write(dir.path(), "described.toml", &described);
    let out = smadp(&["run", &cfg, "--runs", "1", "--out", "d"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
