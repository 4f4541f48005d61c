//! End-to-end checks of the `simdoc` binary: every subcommand, plus the
//! exit-code contract (0 success, 2 validation, 3 solver).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn simdoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simdoc")).args(args).output().expect("spawn simdoc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn gen_solve_round_trip() {
    let inst = tmp("planted.txt");
    let out = simdoc(&[
        "gen", "--n", "16", "--l", "2", "--p", "0.6", "--seed", "5", "--plant", "orthogonal",
        "--pair", "0,3", "--output", inst.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = simdoc(&["solve", "--problem", "ov", "--input", inst.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "yes");

    // fast-ov and transformer agree with the oracle
    for solver in ["fast-ov", "transformer"] {
        let out = simdoc(&[
            "solve", "--problem", "ov", "--solver", solver, "--input", inst.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{solver}: {out:?}");
        assert_eq!(stdout(&out).trim(), "yes", "{solver}");
    }

    let out = simdoc(&[
        "solve", "--problem", "max-ip", "--threshold", "1", "--input", inst.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(["yes", "no"].contains(&stdout(&out).trim()));
}

#[test]
fn solve_msd_with_planted_cosine() {
    let inst = tmp("msd.txt");
    let out = simdoc(&[
        // p and seed chosen so every row is nonzero (MSD rejects zero rows)
        "gen", "--n", "36", "--l", "2", "--p", "0.8", "--seed", "2", "--plant",
        "cosine-at-least:1/1", "--output", inst.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    for solver in ["oracle", "transformer"] {
        let out = simdoc(&[
            "solve", "--problem", "msd", "--solver", solver, "--threshold", "3/5", "--input",
            inst.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{solver}: {out:?}");
        assert_eq!(stdout(&out).trim(), "yes", "{solver}");
    }
}

#[test]
fn reduce_emits_parseable_instances() {
    let mono = tmp("mono.txt");
    assert!(simdoc(&[
        "gen", "--n", "6", "--l", "3", "--p", "0.9", "--seed", "2", "--output",
        mono.to_str().unwrap(),
    ])
    .status
    .success());

    let bich = tmp("bich.txt");
    let out = simdoc(&[
        "reduce", "--from", "ov-mono", "--to", "ov-bichrom", "--input", mono.to_str().unwrap(),
        "--output", bich.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let back = tmp("back.txt");
    let out = simdoc(&[
        "reduce", "--from", "ov-bichrom", "--to", "ov-mono", "--input", bich.to_str().unwrap(),
        "--output", back.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    // answers match across the round trip
    let a = simdoc(&["solve", "--problem", "ov", "--input", mono.to_str().unwrap()]);
    let b = simdoc(&["solve", "--problem", "ov", "--input", back.to_str().unwrap()]);
    assert_eq!(stdout(&a), stdout(&b));

    let padded = tmp("padded.txt");
    assert!(simdoc(&[
        "reduce", "--from", "bichrom", "--to", "equal-popcount", "--input",
        bich.to_str().unwrap(), "--output", padded.to_str().unwrap(),
    ])
    .status
    .success());

    let tensored = tmp("tensored.txt");
    assert!(simdoc(&[
        "reduce", "--from", "mono", "--to", "tensor:2", "--input", mono.to_str().unwrap(),
        "--output", tensored.to_str().unwrap(),
    ])
    .status
    .success());
}

#[test]
fn bench_and_compare_emit_csv() {
    let cfg = tmp("bench.toml");
    let csv = tmp("bench.csv");
    std::fs::write(
        &cfg,
        format!(
            "problem = \"ov\"\nsolver = \"oracle\"\nladder = [16, 32]\nl = 4\nreps = 3\nseed = 1\np = 0.5\noutput = {:?}\n",
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = simdoc(&["bench", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("problem,solver,n,l,threshold,answer,median_ms,min_ms,seed\n"));
    assert_eq!(text.lines().count(), 3);

    let out = simdoc(&[
        "compare", "--family", "msd", "--n", "36", "--l", "2", "--trials", "4", "--solvers",
        "oracle,heuristic:sampled:4", "--parallel",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("4/4"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // malformed instance file: validation/codec, exit 2
    let bad = tmp("bad.txt");
    std::fs::write(&bad, "not an instance\n").unwrap();
    let out = simdoc(&["solve", "--problem", "ov", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // threshold missing for a threshold problem: exit 2
    let inst = tmp("ok.txt");
    assert!(simdoc(&[
        "gen", "--n", "4", "--l", "2", "--seed", "1", "--output", inst.to_str().unwrap()
    ])
    .status
    .success());
    let out = simdoc(&["solve", "--problem", "max-ip", "--input", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // missing file: i/o, exit 3
    let out = simdoc(&["solve", "--problem", "ov", "--input", "/nonexistent/x.txt"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}
