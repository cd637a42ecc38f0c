//! Golden-file tests: every subcommand runs against the fixtures and must
//! reproduce its stored output and exit code byte for byte.
//!
//! Regenerate a golden file by deleting it and re-running the tests: a
//! missing file is written from the observed output and the test fails
//! once, prompting a review of the diff.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_pdl"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("PDL_TREE_CAP")
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
        out.status.code().unwrap_or(-1),
    )
}

fn golden(name: &str, args: &[&str], expected_code: i32) {
    let (stdout, stderr, code) = run(args);
    assert_eq!(
        code, expected_code,
        "{name}: exit {code}, expected {expected_code}\nstdout:\n{stdout}\nstderr:\n{stderr}"
    );
    let path = golden_dir().join(format!("{name}.txt"));
    if !path.exists() {
        std::fs::write(&path, &stdout).expect("write golden");
        panic!("{name}: golden file created, review and rerun");
    }
    let expected = std::fs::read_to_string(&path).expect("read golden");
    assert_eq!(stdout, expected, "{name}: output drifted from golden file");
}

#[test]
fn golden_mc() {
    golden(
        "mc",
        &["mc", "--lts", "path.lts", "--formula", "EF[SLANG] true", "--env", "marked.env", "--naive"],
        0,
    );
}

#[test]
fn golden_equiv() {
    golden(
        "equiv",
        &[
            "equiv",
            "--formula", "EF[A] EF[BD] true",
            "--formula2", "EF[SINGLE] true",
            "--env", "langs.env",
        ],
        0,
    );
}

#[test]
fn golden_valid() {
    golden(
        "valid",
        &["valid", "--formula", "AG[A] false", "--env", "langs.env"],
        1,
    );
}

#[test]
fn golden_monotone() {
    golden(
        "monotone",
        &["monotone", "--formula", "AG[A] false", "--env", "langs.env"],
        1,
    );
}

#[test]
fn golden_elim_ew() {
    golden(
        "elim_ew",
        &["elim-ew", "--formula", "EF[EA] true", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_dnf() {
    golden(
        "dnf",
        &["dnf", "--formula", "((AG[A] false | EF[A] true) & EF[BD] true)"],
        0,
    );
}

#[test]
fn golden_complete() {
    golden(
        "complete",
        &[
            "complete",
            "--formula", "(EF[A] true & EF[AB] true)",
            "--env", "langs.env",
        ],
        0,
    );
}

#[test]
fn golden_elim_ag() {
    golden(
        "elim_ag",
        &[
            "elim-ag",
            "--formula", "((AG[A] false & EF[AB] true) | EF[AB] true)",
            "--env", "langs.env",
        ],
        0,
    );
}

#[test]
fn golden_measure() {
    golden(
        "measure",
        &["measure", "--formula", "EF[AB] EF[PAL] true", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_measure_cmp() {
    golden(
        "measure_cmp",
        &["measure-cmp", "--measure", "{[w]}", "--measure2", "{[2], [3]}"],
        0,
    );
}

#[test]
fn golden_quotient() {
    golden(
        "quotient",
        &["quotient", "--lang", "L0", "--letter", "a", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_split_dollar() {
    golden(
        "split_dollar",
        &["split-dollar", "--lang", "L0", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_prestar() {
    golden(
        "prestar",
        &["prestar", "--pds", "pop.pds", "--target", "target.aut"],
        0,
    );
}

#[test]
fn golden_prestar_lifo_matches_fifo() {
    let (fifo, _, code_f) = run(&["prestar", "--pds", "pop.pds", "--target", "target.aut"]);
    let (lifo, _, code_l) = run(&["prestar", "--pds", "pop.pds", "--target", "target.aut", "--lifo"]);
    assert_eq!(code_f, 0);
    assert_eq!(code_l, 0);
    assert_eq!(fifo, lifo, "worklist order changed the saturated automaton");
}

#[test]
fn golden_pump() {
    golden(
        "pump",
        &["pump", "--dpda", "crcycle.dpda", "--periodic", "cr"],
        0,
    );
}

#[test]
fn golden_lang_member() {
    golden(
        "lang_member",
        &["lang", "member", "--lang", "PAL", "--word", "aba", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_lang_enumerate() {
    golden(
        "lang_enumerate",
        &[
            "--bounds", "len=3",
            "lang", "enumerate", "--lang", "PAL", "--env", "langs.env",
        ],
        0,
    );
}

#[test]
fn golden_lang_norm() {
    golden(
        "lang_norm",
        &["lang", "norm", "--lang", "AB", "--env", "langs.env"],
        0,
    );
}

#[test]
fn golden_extract() {
    golden(
        "extract",
        &["extract", "--formula", "EF[SLANG] true", "--env", "marked.env"],
        0,
    );
}

#[test]
fn golden_extract_json() {
    golden(
        "extract_json",
        &["--json", "extract", "--formula", "EF[SLANG] true", "--env", "marked.env"],
        0,
    );
}

#[test]
fn golden_witness_family() {
    golden(
        "witness_family",
        &["witness-family", "--v", "", "--count", "3"],
        0,
    );
}

#[test]
fn golden_orthogonal() {
    golden(
        "orthogonal",
        &["orthogonal", "--quads", "_,0,1,_", "--letters", "01"],
        0,
    );
}

#[test]
fn golden_good_check() {
    golden(
        "good_check",
        &[
            "--bounds", "len=4",
            "good-check",
            "--env", "langs.env",
            "--target", "PAL",
            "--pair", "EA:EA",
        ],
        1,
    );
}

#[test]
fn golden_pal_demo() {
    golden("pal_demo", &["pal-demo", "--len", "4"], 0);
}

#[test]
fn pal_demo_is_byte_identical_across_runs() {
    let (a, _, code_a) = run(&["pal-demo", "--len", "4", "--json"]);
    let (b, _, code_b) = run(&["pal-demo", "--len", "4", "--json"]);
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert_eq!(a, b, "demo report is not deterministic");
}

#[test]
fn usage_and_data_errors() {
    let (_, _, code) = run(&["mc", "--formula", "true"]);
    assert_eq!(code, 64, "missing required --lts should be a usage error");
    let (_, stderr, code) = run(&["valid", "--formula", "EF[NOPE] true", "--env", "langs.env"]);
    assert_eq!(code, 65, "unresolved names are data errors");
    assert!(stderr.contains("NOPE"));
    let (_, _, code) = run(&["measure-cmp", "--measure", "nonsense", "--measure2", "{}"]);
    assert_eq!(code, 64);
}
