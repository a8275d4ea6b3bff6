//! End-to-end runs of the pgx binary: subcommand wiring and the exit-status
//! discipline (0 pass, 1 mathematical failure, 2 usage/parse errors).

use std::path::PathBuf;
use std::process::{Command, Output};

fn pgx(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgx"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pgx-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn build_then_check_passes() {
    let dir = tmpdir("build-check");
    let out = pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "3",
            "--vertices",
            "4",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = pgx(&["check", "h.pgx"], &dir);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("quasigroupoid"));
    assert!(text.contains("associative"));
}

#[test]
fn odd_twist_fails_associativity_with_exit_1() {
    let dir = tmpdir("twist");
    assert_eq!(
        code(&pgx(
            &[
                "build",
                "--n",
                "3",
                "--group",
                "2",
                "--vertices",
                "5",
                "-o",
                "h.pgx"
            ],
            &dir
        )),
        0
    );
    assert_eq!(
        code(&pgx(&["twist", "h.pgx", "--g", "1", "-o", "t.pgx"], &dir)),
        0
    );
    let out = pgx(&["check", "t.pgx", "--axioms", "associative"], &dir);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    // quasigroupoid proper still passes
    let out = pgx(&["check", "t.pgx", "--axioms", "quasigroupoid"], &dir);
    assert_eq!(code(&out), 0);
}

#[test]
fn aut_count_prints_24() {
    let dir = tmpdir("aut");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2",
            "--vertices",
            "3",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    let out = pgx(&["aut", "h.pgx", "--count"], &dir);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("24"), "unexpected census output: {text}");
}

#[test]
fn fill_solves_alternating_sum() {
    let dir = tmpdir("fill");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "3",
            "--vertices",
            "3",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    let out = pgx(
        &[
            "fill",
            "h.pgx",
            "--missing",
            "2",
            "--face",
            "v1.v2@1",
            "--face",
            "v0.v1@1",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("v0.v2@2"));
}

#[test]
fn iso_and_exit_codes() {
    let dir = tmpdir("iso");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "4",
            "--vertices",
            "4",
            "-o",
            "a.pgx",
        ],
        &dir,
    );
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2x2",
            "--vertices",
            "4",
            "-o",
            "b.pgx",
        ],
        &dir,
    );
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "4",
            "--vertices",
            "4",
            "-o",
            "c.pgx",
        ],
        &dir,
    );
    assert_eq!(code(&pgx(&["iso", "a.pgx", "c.pgx"], &dir)), 0);
    assert_eq!(code(&pgx(&["iso", "a.pgx", "b.pgx"], &dir)), 1);
}

#[test]
fn amalg_verdicts_and_witness() {
    let dir = tmpdir("amalg");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2",
            "--vertices",
            "5",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    assert_eq!(code(&pgx(&["amalg", "h.pgx", "--k", "2"], &dir)), 0);
    let out = pgx(&["amalg", "h.pgx", "--k", "3"], &dir);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness pair"));
    let out = pgx(&["witness", "h.pgx", "--tuple", "v0,v1,v2"], &dir);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("moved to"));
}

#[test]
fn recover_and_defect_and_factor() {
    let dir = tmpdir("misc");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "3",
            "--vertices",
            "4",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    let out = pgx(&["recover", "h.pgx"], &dir);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("order 3"));
    let out = pgx(&["defect", "h.pgx"], &dir);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("structure defect: 0"));
    let out = pgx(&["defect", "h.pgx", "--family"], &dir);
    assert_eq!(code(&out), 0);
    let out = pgx(
        &[
            "factor",
            "h.pgx",
            "--a",
            "v0,v1",
            "--b",
            "v0,v2",
            "--sigma-twist",
            "v0.v3@1",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tmpdir("parse");
    std::fs::write(dir.join("bad.pgx"), "pgx 9\nn 2\n").unwrap();
    let out = pgx(&["check", "bad.pgx"], &dir);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    // missing file
    assert_eq!(code(&pgx(&["check", "nope.pgx"], &dir)), 2);
    // clap usage error
    assert_eq!(code(&pgx(&["build", "--n", "2"], &dir)), 2);
}

#[test]
fn census_bound_env_override() {
    let dir = tmpdir("env");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2",
            "--vertices",
            "3",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_pgx"))
        .args(["aut", "h.pgx", "--count"])
        .env("PGX_MAX_SEARCH", "10")
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2); // capacity exceeded under the tiny bound
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}

#[test]
fn json_reports_are_machine_readable() {
    let dir = tmpdir("json");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2",
            "--vertices",
            "4",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    let out = pgx(&["check", "h.pgx", "--json"], &dir);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(report["command"], "check");
    assert_eq!(report["status"], "pass");
    assert!(report["data"]["axioms"].as_array().unwrap().len() >= 4);

    let out = pgx(&["amalg", "h.pgx", "--k", "3", "--json"], &dir);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "fail");
    assert_eq!(report["data"]["verdict"], "witness_pair");

    std::fs::write(dir.join("bad.pgx"), "pgx 9\n").unwrap();
    let out = pgx(&["check", "bad.pgx", "--json"], &dir);
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "error");
}

#[test]
fn roundtrip_via_files() {
    let dir = tmpdir("roundtrip");
    pgx(
        &[
            "build",
            "--n",
            "2",
            "--group",
            "2",
            "--vertices",
            "4",
            "-o",
            "h.pgx",
        ],
        &dir,
    );
    pgx(&["twist", "h.pgx", "--g", "1", "-o", "t.pgx"], &dir);
    let text = std::fs::read_to_string(dir.join("t.pgx")).unwrap();
    let parsed = polygroupoid::pgx::parse(&text).unwrap();
    assert_eq!(polygroupoid::pgx::serialize(&parsed), text);
}
