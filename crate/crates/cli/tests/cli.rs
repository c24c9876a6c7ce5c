use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topic-entropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) {
    ok(&[
        "synth",
        "--topics",
        "3",
        "--vocab",
        "40",
        "--docs",
        "30",
        "--doc-len",
        "25",
        "--alpha",
        "0.1",
        "--beta",
        "0.1",
        "--seed",
        "9",
        "--out",
        s(dir),
    ]);
}

#[test]
fn synth_writes_uci_files_and_truth() {
    let dir = TempDir::new().unwrap();
    synth(dir.path());
    let docword = fs::read_to_string(dir.path().join("docword.txt")).unwrap();
    let header: Vec<&str> = docword.lines().take(2).collect();
    assert_eq!(header, vec!["30", "40"]);
    assert_eq!(
        fs::read_to_string(dir.path().join("vocab.txt"))
            .unwrap()
            .lines()
            .count(),
        40
    );
    let phi = fs::read_to_string(dir.path().join("true_phi.csv")).unwrap();
    assert_eq!(phi.lines().next().unwrap(), "topic_0,topic_1,topic_2");
    assert_eq!(phi.lines().count(), 41);
}

#[test]
fn sweep_over_synthetic_corpus() {
    let data = TempDir::new().unwrap();
    synth(data.path());
    let out = TempDir::new().unwrap();
    let stdout = ok(&[
        "sweep",
        "--model",
        "lda-gs",
        "--input",
        s(&data.path().join("docword.txt")),
        "--format",
        "uci",
        "--vocab",
        s(&data.path().join("vocab.txt")),
        "--t-min",
        "2",
        "--t-max",
        "6",
        "--runs",
        "2",
        "--iterations",
        "10",
        "--seed",
        "4",
        "--out",
        s(out.path()),
    ]);
    assert!(stdout.contains("renyi minimum at T="));
    for f in [
        "entropy_curve.csv",
        "jaccard_matrix.csv",
        "jaccard_diagonal.csv",
        "jaccard_matrix_run1.csv",
        "top_words_T2.txt",
        "top_words_T6.txt",
        "manifest.json",
    ] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }
    let curve = fs::read_to_string(out.path().join("entropy_curve.csv")).unwrap();
    // header + 3 T values x (2 runs + avg)
    assert_eq!(curve.lines().count(), 10);
    let manifest = fs::read_to_string(out.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"base_seed\": 4"));
}

#[test]
fn sweep_is_reproducible() {
    let data = TempDir::new().unwrap();
    let text = data.path().join("docs.txt");
    fs::write(
        &text,
        "apple banana apple cherry\nbanana cherry durian\napple durian elder fig\nfig grape grape elder\n",
    )
    .unwrap();
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        ok(&[
            "sweep",
            "--model",
            "glda",
            "--input",
            s(&text),
            "--t-min",
            "2",
            "--t-max",
            "4",
            "--runs",
            "1",
            "--iterations",
            "5",
            "--seed",
            "11",
            "--out",
            s(dir.path()),
        ]);
    }
    for f in ["entropy_curve.csv", "jaccard_matrix.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn fit_exports_matrices_and_trace() {
    let data = TempDir::new().unwrap();
    let text = data.path().join("docs.txt");
    let stop = data.path().join("stop.txt");
    fs::write(&text, "the cat sat\nthe dog ran far\ncat and dog\n").unwrap();
    fs::write(&stop, "the\nand\n").unwrap();
    let out = TempDir::new().unwrap();
    ok(&[
        "fit",
        "--model",
        "plsa",
        "--input",
        s(&text),
        "--stopwords",
        s(&stop),
        "--topics",
        "2",
        "--iterations",
        "20",
        "--out",
        s(out.path()),
    ]);
    let phi = fs::read_to_string(out.path().join("phi.csv")).unwrap();
    // cat sat dog ran far
    assert_eq!(phi.lines().count(), 6);
    let theta = fs::read_to_string(out.path().join("theta.csv")).unwrap();
    assert_eq!(theta.lines().count(), 4);
    let trace = fs::read_to_string(out.path().join("loglik_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 21);
}

#[test]
fn invariance_recomputes_stored_matrix() {
    let data = TempDir::new().unwrap();
    synth(data.path());
    let out = TempDir::new().unwrap();
    ok(&[
        "sweep",
        "--model",
        "plsa",
        "--input",
        s(&data.path().join("docword.txt")),
        "--format",
        "uci",
        "--vocab",
        s(&data.path().join("vocab.txt")),
        "--t-min",
        "2",
        "--t-max",
        "8",
        "--runs",
        "1",
        "--iterations",
        "15",
        "--out",
        s(out.path()),
    ]);
    let again = TempDir::new().unwrap();
    ok(&["invariance", "--dir", s(out.path()), "--out", s(again.path())]);
    for f in ["jaccard_matrix.csv", "jaccard_diagonal.csv"] {
        assert_eq!(
            fs::read_to_string(out.path().join(f)).unwrap(),
            fs::read_to_string(again.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "sweep",
            "--model",
            "plsa",
            "--input",
            s(&missing),
            "--t-min",
            "2",
            "--t-max",
            "4",
            "--out",
            s(dir.path()),
        ],
        vec![
            "sweep",
            "--model",
            "plsa",
            "--input",
            s(&missing),
            "--format",
            "uci",
            "--t-min",
            "2",
            "--t-max",
            "4",
            "--out",
            s(dir.path()),
        ],
        vec!["invariance", "--dir", s(dir.path())],
        vec![
            "synth",
            "--topics",
            "5",
            "--vocab",
            "3",
            "--docs",
            "2",
            "--doc-len",
            "2",
            "--out",
            s(dir.path()),
        ],
    ];
    for args in cases {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error: "), "{args:?}: {err}");
    }
    assert!(!run(&["sweep", "--model", "nonsense"]).status.success());
}

#[test]
fn sweep_rejects_bad_range() {
    let data = TempDir::new().unwrap();
    let text = data.path().join("docs.txt");
    fs::write(&text, "aa bb cc\ndd ee ff\n").unwrap();
    let out = run(&[
        "sweep",
        "--model",
        "vlda",
        "--input",
        s(&text),
        "--t-min",
        "2",
        "--t-max",
        "10",
        "--out",
        s(data.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds vocabulary size"));
}
