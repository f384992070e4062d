use std::collections::BTreeSet;
use std::process::{Command, Output};

use quasispec_cli::report::{GordonBundle, LyapunovReport, SpectrumReport, WordReport};
use quasispec_cli::ExperimentConfig;

fn quasispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasispec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = quasispec(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn spectrum_csv_rows() {
    let text = stdout(&["spectrum", "--levels", "1..6", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("level,q,band_count,measure,measure_intersect_prev")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r[1], r[2], "band count equals period");
    }
    let q: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(q, ["1", "2", "3", "5", "8", "13"]);
}

#[test]
fn fibonacci_word() {
    let r: WordReport = serde_json::from_str(&stdout(&["word", "--length", "8"])).unwrap();
    assert_eq!(r.word, "10110101");
    let sub: WordReport = serde_json::from_str(&stdout(&[
        "word",
        "--length",
        "8",
        "--substitution",
        "a:ab,b:a",
    ]))
    .unwrap();
    // letters print as their indices
    assert_eq!(sub.word, "01001010");
}

#[test]
fn invalid_beta_exits_with_two() {
    let out = quasispec(&["word", "--length", "8", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn boundary_ambiguity_exits_with_four() {
    let out = quasispec(&[
        "lyapunov",
        "--energies",
        "0.5",
        "--steps",
        "1000",
        "--theta",
        "1/1000000000000000000000000000000000000",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn gordon_bundle_shape() {
    let text = stdout(&[
        "gordon",
        "--level",
        "3..4",
        "--energies",
        "0:1:5",
        "--seeds",
        "5",
    ]);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: BTreeSet<&str> = value
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    assert_eq!(
        keys,
        BTreeSet::from(["config", "certificates", "derived_constant"])
    );
    let bundle: GordonBundle = serde_json::from_str(&text).unwrap();
    assert_eq!(bundle.certificates.len(), 2);
    for cert in &bundle.certificates {
        assert!(cert.membership.square_ok);
        assert!(cert.nondecay.iter().all(|r| r.holds));
    }
    let again = serde_json::to_string_pretty(&bundle).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn reports_round_trip() {
    let text = stdout(&["spectrum", "--levels", "0,3,5"]);
    let r: SpectrumReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.rows[0].measure_intersect_prev, None);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);

    let text = stdout(&["lyapunov", "--energies", "-1,0.25,3", "--steps", "2000"]);
    let r: LyapunovReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.rows[2].gamma_plus > 0.5, "outside the spectrum");
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
}

#[test]
fn lyapunov_csv_header() {
    let text = stdout(&[
        "lyapunov",
        "--energies",
        "0:1:3",
        "--steps",
        "1000",
        "--format",
        "csv",
    ]);
    assert_eq!(text.lines().next(), Some("E,gamma_plus,gamma_minus"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn output_is_reproducible() {
    let args = [
        "--jobs",
        "1",
        "gordon",
        "--level",
        "4",
        "--energies",
        "from-spectrum:6",
        "--seeds",
        "10",
        "--rng-seed",
        "7",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    // only the echoed thread count may differ
    let mut parallel = args.to_vec();
    parallel[1] = "4";
    let mut a: GordonBundle = serde_json::from_str(&first).unwrap();
    let mut b: GordonBundle = serde_json::from_str(&stdout(&parallel)).unwrap();
    assert_eq!(b.config.experiment.jobs, Some(4));
    a.config.experiment.jobs = None;
    b.config.experiment.jobs = None;
    assert_eq!(a, b);
}

#[test]
fn run_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("word.toml");
    std::fs::write(
        &toml_path,
        "[model]\nname = \"fibonacci\"\n\n[task]\nkind = \"word\"\nlength = 13\n",
    )
    .unwrap();
    let r: WordReport =
        serde_json::from_str(&stdout(&["run", "--config", toml_path.to_str().unwrap()])).unwrap();
    assert_eq!(r.word, "1011010110110");

    // a report's echo is itself a runnable config
    let json_path = dir.path().join("echo.json");
    std::fs::write(
        &json_path,
        serde_json::to_string(&r.config.experiment).unwrap(),
    )
    .unwrap();
    let again: WordReport =
        serde_json::from_str(&stdout(&["run", "--config", json_path.to_str().unwrap()])).unwrap();
    assert_eq!(again, r);

    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "[model]\nname = \"fibonacci\"\ncolour = 3\n\n[task]\nkind = \"word\"\nlength = 13\n",
    )
    .unwrap();
    let out = quasispec(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let out = quasispec(&[
        "word",
        "--length",
        "5",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "word\n10110\n");
}

#[test]
fn csv_is_refused_for_json_only_reports() {
    let out = quasispec(&[
        "hull-check",
        "--L",
        "5",
        "--grid",
        "100",
        "--prefix",
        "1000",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_rejects_unknown_task_keys() {
    let text = r#"{"model":{},"task":{"kind":"word","length":4,"extra":1}}"#;
    assert!(ExperimentConfig::from_text(text, false).is_err());
}
