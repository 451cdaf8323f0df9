use std::process::Command;

use tempfile::tempdir;

fn augqp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_augqp"))
}

#[test]
fn gen_check_solve_round_trip() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("p.qp");
    let sol = dir.path().join("p.sol");

    let out = augqp()
        .args(["gen", "--seed", "5", "--n", "6", "--m", "3", "--out"])
        .arg(&prob)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = augqp().arg("check").arg(&prob).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("variables            6"));
    assert!(text.contains("linear constraints   3"));

    let out = augqp()
        .args(["solve"])
        .arg(&prob)
        .arg("--out")
        .arg(&sol)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&sol).unwrap();
    assert!(text.starts_with("augqp-solution"));
    assert!(text.contains("status converged"));
}

#[test]
fn solve_output_is_deterministic() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("p.qp");
    augqp()
        .args(["gen", "--seed", "9", "--n", "5", "--m", "2", "--out"])
        .arg(&prob)
        .output()
        .unwrap();
    let run = || {
        let out = augqp().arg("solve").arg(&prob).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn oracle_agrees_with_solver() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("p.qp");
    augqp()
        .args(["gen", "--seed", "3", "--n", "4", "--m", "2", "--out"])
        .arg(&prob)
        .output()
        .unwrap();
    let sol = augqp().arg("solve").arg(&prob).output().unwrap();
    let ora = augqp().arg("oracle").arg(&prob).output().unwrap();
    assert!(sol.status.success() && ora.status.success());
    let get_obj = |bytes: &[u8]| -> f64 {
        String::from_utf8_lossy(bytes)
            .lines()
            .find_map(|l| l.strip_prefix("objective ").map(|v| v.parse().unwrap()))
            .unwrap()
    };
    let diff = (get_obj(&sol.stdout) - get_obj(&ora.stdout)).abs();
    assert!(diff < 1e-6, "objective gap {}", diff);
}

#[test]
fn missing_file_exits_with_validation_code() {
    let out = augqp().args(["solve", "/nonexistent/file.qp"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_file_exits_with_validation_code() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("bad.qp");
    std::fs::write(&prob, "not a problem file\n").unwrap();
    let out = augqp().arg("solve").arg(&prob).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("p.qp");
    let out = augqp()
        .args(["gen", "--preset", "nope", "--out"])
        .arg(&prob)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vmat-hn"));
}

#[test]
fn iteration_limit_exits_with_solver_code() {
    let dir = tempdir().unwrap();
    let prob = dir.path().join("p.qp");
    augqp()
        .args(["gen", "--seed", "5", "--n", "6", "--m", "3", "--out"])
        .arg(&prob)
        .output()
        .unwrap();
    let out = augqp()
        .arg("solve")
        .arg(&prob)
        .args(["--max-iter", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("status iteration-limit"));
}
