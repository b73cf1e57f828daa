//! End-to-end tests of the `mkabe` binary: exit codes, file outputs and
//! determinism of seeded runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mkabe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkabe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mkabe(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    mkabe(dir, args).status.code().unwrap()
}

/// Generates params and keys for A..D in the given directory.
fn setup_keys(dir: &Path) {
    ok(dir, &["--seed", "aa", "params", "--n", "10"]);
    ok(dir, &["--seed", "bb", "keygen", "--attrs", "A,B,C,D"]);
}

#[test]
fn keygen_writes_one_file_per_attribute_plus_public_params() {
    let tmp = TempDir::new().unwrap();
    setup_keys(tmp.path());
    for name in ["A", "B", "C", "D"] {
        assert!(tmp.path().join(format!("{name}.key.json")).exists());
    }
    let pp = fs::read_to_string(tmp.path().join("publicparams.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&pp).unwrap();
    assert_eq!(parsed["pks"].as_object().unwrap().len(), 4);
}

#[test]
fn duplicate_attribute_list_exits_2() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["--seed", "aa", "params", "--n", "10"]);
    assert_eq!(code(tmp.path(), &["keygen", "--attrs", "A,A"]), 2);
}

#[test]
fn encrypt_decrypt_round_trip_and_exit_codes() {
    let tmp = TempDir::new().unwrap();
    setup_keys(tmp.path());
    ok(
        tmp.path(),
        &[
            "--seed", "cc", "encrypt",
            "--policy", "(A & B) | (B & C) | (C & D)",
            "--message", "7",
        ],
    );
    let m = ok(tmp.path(), &["decrypt", "--keys", "A.key.json,B.key.json"]);
    assert_eq!(m.trim(), "7");
    // Non-satisfying coalition.
    assert_eq!(code(tmp.path(), &["decrypt", "--keys", "A.key.json,C.key.json"]), 3);
    // Unparseable policy.
    assert_eq!(
        code(tmp.path(), &["encrypt", "--policy", "A &", "--message", "7"]),
        2
    );
    // Message out of range for the group's q.
    assert_eq!(
        code(tmp.path(), &["encrypt", "--policy", "A", "--message", "99999999"]),
        2
    );
}

#[test]
fn corrupted_ciphertext_exits_4() {
    let tmp = TempDir::new().unwrap();
    setup_keys(tmp.path());
    ok(
        tmp.path(),
        &["--seed", "cc", "encrypt", "--policy", "A & B", "--message", "7"],
    );
    let path = tmp.path().join("ciphertext.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let e_prime: u64 = parsed["e_prime"].as_str().unwrap().parse().unwrap();
    parsed["e_prime"] = serde_json::Value::String(((e_prime + 1) % 445).to_string());
    fs::write(&path, serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(code(tmp.path(), &["decrypt", "--keys", "A.key.json,B.key.json"]), 4);
}

#[test]
fn no_integrity_skips_the_tag_check() {
    let tmp = TempDir::new().unwrap();
    setup_keys(tmp.path());
    ok(
        tmp.path(),
        &[
            "--seed", "cc", "encrypt", "--no-integrity",
            "--policy", "A & B", "--message", "7",
        ],
    );
    let text = fs::read_to_string(tmp.path().join("ciphertext.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(parsed["tag"].is_null());
    let m = ok(tmp.path(), &["decrypt", "--keys", "A.key.json,B.key.json"]);
    assert_eq!(m.trim(), "7");
}

#[test]
fn hybrid_mode_round_trips_text() {
    let tmp = TempDir::new().unwrap();
    setup_keys(tmp.path());
    ok(
        tmp.path(),
        &[
            "--seed", "dd", "encrypt", "--hybrid",
            "--policy", "(A & B) | C",
            "--message", "attribute-based hello",
        ],
    );
    let m = ok(tmp.path(), &["decrypt", "--keys", "C.key.json"]);
    assert_eq!(m.trim_end(), "attribute-based hello");
}

#[test]
fn inspect_prints_attr_j_addr_rows() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["inspect", "(A & B) | (B & C) | (C & D)"]);
    assert_eq!(out, "A,1,0\nB,1,1\nB,2,2\nC,1,3\nC,2,4\nD,1,5\n");
    let out = ok(tmp.path(), &["inspect", "A"]);
    assert_eq!(out, "A,1,0\n");
    assert_eq!(code(tmp.path(), &["inspect", "A | | B"]), 2);
}

#[test]
fn share_reconstruct_round_trip() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &[
            "--seed", "ee", "share",
            "--formula", "(A & B) | C", "--secret", "3", "--q", "1019",
        ],
    );
    let s = ok(tmp.path(), &["reconstruct", "--attrs", "A,B"]);
    assert_eq!(s.trim(), "3");
    assert_eq!(code(tmp.path(), &["reconstruct", "--attrs", "A"]), 3);
    // Composite modulus rejected.
    assert_eq!(
        code(
            tmp.path(),
            &["share", "--formula", "A", "--secret", "1", "--q", "6"],
        ),
        2
    );
}

#[test]
fn game_reports_are_json_with_expected_fields() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &["--seed", "0102", "game", "selective-id", "--trials", "200"],
    );
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["game"], "selective-id");
    assert_eq!(parsed["trials"], 200);
    assert_eq!(parsed["seed"], "0102");
    assert!(parsed["advantage"].as_f64().unwrap() <= 0.5);
    assert!(parsed["halfwidth"].as_f64().unwrap() > 0.0);
    // Mismatched adversary/game pairs are input errors.
    assert_eq!(
        code(tmp.path(), &["game", "m-ddh", "--adversary", "omniscient"]),
        2
    );
    assert_eq!(
        code(tmp.path(), &["game", "m-ddh", "--adversary", "dlog", "--trials", "10"]),
        2,
        "dlog without --tiny must be refused"
    );
}

#[test]
fn seeded_runs_are_byte_identical() {
    let run = |tag: &str| {
        let tmp = TempDir::new().unwrap();
        setup_keys(tmp.path());
        ok(
            tmp.path(),
            &[
                "--seed", "deadbeef", "encrypt",
                "--policy", "(A & B) | (B & C) | (C & D)",
                "--message", "42",
            ],
        );
        ok(
            tmp.path(),
            &[
                "--seed", "feed", "share",
                "--formula", "(A & B) | C", "--secret", "9", "--q", "1019",
            ],
        );
        let game = ok(
            tmp.path(),
            &["--seed", "0303", "game", "m-prf", "--trials", "100"],
        );
        let mut files = vec![game.into_bytes()];
        for name in [
            "params.json",
            "publicparams.json",
            "A.key.json",
            "ciphertext.json",
            "sharing.json",
        ] {
            files.push(fs::read(tmp.path().join(name)).unwrap_or_else(|_| panic!("{tag}: {name}")));
        }
        files
    };
    assert_eq!(run("first"), run("second"));
}

#[test]
fn missing_files_exit_2() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(tmp.path(), &["keygen", "--attrs", "A"]), 2);
    assert_eq!(code(tmp.path(), &["decrypt", "--keys", "A.key.json"]), 2);
    assert_eq!(code(tmp.path(), &["reconstruct", "--attrs", "A"]), 2);
}
