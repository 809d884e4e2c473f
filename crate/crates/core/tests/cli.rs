// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::process::{Command, Output};

use qst::transfer::{run, Backend, TransferConfig, CSV_HEADER};

fn qst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qst"))
        .args(args)
        .env("QST_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const RUN_25: [&str; 13] = [
    "run",
    "--m",
    "25",
    "--n",
    "25",
    "--sender",
    "0",
    "--receiver",
    "1",
    "--eps1",
    "0.01",
    "--eps2",
    "0.01",
];

#[test]
fn run_large_same_partition_passes() {
    let o = qst(&RUN_25);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = stdout(&o);
    let fields: Vec<&str> = row.trim().split(',').collect();
    assert_eq!(fields.len(), CSV_HEADER.split(',').count());
    let f: f64 = fields[11].parse().unwrap();
    assert!(f > 0.94);
    assert_eq!(fields[13], "true");
}

#[test]
fn run_output_is_deterministic() {
    let a = qst(&RUN_25);
    let b = qst(&RUN_25);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_rejects_equal_endpoints() {
    let o = qst(&[
        "run",
        "--m",
        "4",
        "--n",
        "3",
        "--sender",
        "0",
        "--receiver",
        "0",
        "--eps1",
        "0.1",
        "--eps2",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("sender and receiver"));
}

#[test]
fn run_both_backends_reports_disagreement() {
    let o = qst(&[
        "run",
        "--m",
        "7",
        "--n",
        "5",
        "--sender",
        "0",
        "--receiver",
        "7",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
        "--backend",
        "both",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let d: f64 = stdout(&o)
        .trim()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(d < 1e-10);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(
        &path,
        "# transfer settings\nm = 6\nn = 4\nsender = 0\nreceiver = 1\neps1 = 0.04\neps2 = 0.04\nbackend = subspace\n",
    )
    .unwrap();
    let conf = path.to_str().unwrap();
    let from_file = qst(&["run", "--config", conf]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert!(stdout(&from_file).starts_with("same,6,4,0,1,"));

    let overridden = qst(&["run", "--config", conf, "--receiver", "6", "--header"]);
    assert_eq!(overridden.status.code(), Some(0));
    let out = stdout(&overridden);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("diff,6,4,0,6,"));

    fs::write(&path, "m = 6\ncolour = blue\n").unwrap();
    let bad = qst(&["run", "--config", conf]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("colour"));
}

#[test]
fn sweep_single_point_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = qst(&[
        "sweep",
        "--m-range",
        "5..5",
        "--n-range",
        "4..4",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
        "--case",
        "same",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "m,n,F");

    let row = stdout(&qst(&[
        "run",
        "--m",
        "5",
        "--n",
        "4",
        "--sender",
        "0",
        "--receiver",
        "1",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
    ]));
    let f_run = row.trim().split(',').nth(11).unwrap();
    assert_eq!(lines[1], format!("5,4,{f_run}"));
}

#[test]
fn sweep_both_cases_writes_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("heat.csv");
    let o = qst(&[
        "sweep",
        "--m-range",
        "3..5",
        "--n-range",
        "2..4",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
        "--backend",
        "subspace",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!out.exists());
    for tag in ["same", "diff"] {
        let text = fs::read_to_string(dir.path().join(format!("heat_{tag}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 9);
        assert!(rows[0].starts_with("3,2,"));
        assert!(rows[8].starts_with("5,4,"));
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn sweep_matches_library_diff_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = qst(&[
        "sweep",
        "--m-range",
        "4..4",
        "--n-range",
        "6..6",
        "--eps1",
        "0.04",
        "--eps2",
        "0.04",
        "--case",
        "diff",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let f: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let want = run(&TransferConfig::new(4, 6, 0, 4, 0.04, 0.04)).unwrap().f;
    assert_eq!(f, want);
}

#[test]
fn sweep_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = qst(&[
        "sweep",
        "--m-range",
        "1..3",
        "--n-range",
        "1..3",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
        "--case",
        "same",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let missing_dir = dir.path().join("no/such/dir/x.csv");
    let o = qst(&[
        "sweep",
        "--m-range",
        "3..3",
        "--n-range",
        "2..2",
        "--eps1",
        "0.01",
        "--eps2",
        "0.01",
        "--case",
        "same",
        "--out",
        missing_dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot write"));
}

#[test]
fn verify_fast_passes() {
    let o = qst(&["verify", "--level", "fast"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
    assert!(out.contains("decompositions"));
}

#[test]
fn verify_rejects_unknown_level() {
    assert_eq!(qst(&["verify", "--level", "slow"]).status.code(), Some(2));
}

#[test]
fn library_backend_choice_does_not_change_row_prefix() {
    let cfg = TransferConfig::new(6, 3, 0, 2, 0.04, 0.04);
    let a = run(&cfg).unwrap().csv_row();
    let b = run(&cfg.with_backend(Backend::Subspace)).unwrap().csv_row();
    assert_eq!(
        a.split(',').take(9).collect::<Vec<_>>(),
        b.split(',').take(9).collect::<Vec<_>>()
    );
}
