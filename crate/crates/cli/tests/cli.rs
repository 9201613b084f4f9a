use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
}

fn cochange(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cochange"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let o = cochange(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn help_succeeds() {
    let o = cochange(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in [
        "ingest",
        "graph",
        "entropy",
        "metrics",
        "correlate",
        "dataset",
        "stats",
        "pipeline",
    ] {
        assert!(stdout(&o).contains(sub), "missing {sub}");
    }
}

#[test]
fn cochange_entropy_of_the_toy_history() {
    let out = tempfile::tempdir().unwrap();
    let config = fixture("toy/toy.toml");
    let o = cochange(&[
        "entropy",
        "--config",
        config.to_str().unwrap(),
        "--outdir",
        out.path().to_str().unwrap(),
        "--measure",
        "cochange",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().next().unwrap().to_owned();
    let value: f64 = line.split("system_entropy=").nth(1).unwrap().parse().unwrap();
    assert!((value - 1.9056).abs() < 1e-3, "{line}");
    assert!(out.path().join("toy/T/entropy_cochange.csv").is_file());
    assert!(!out.path().join("toy/T/entropy_change.csv").exists());
}

#[test]
fn dataset_with_both_entropies() {
    let out = tempfile::tempdir().unwrap();
    let config = fixture("sample/sample.toml");
    let o = cochange(&[
        "dataset",
        "--config",
        config.to_str().unwrap(),
        "--outdir",
        out.path().to_str().unwrap(),
        "--set",
        "P+C+Co",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["train.csv", "test.csv"] {
        let h = header(&out.path().join("sample/P+C+Co").join(name));
        let cols: Vec<&str> = h.split(',').collect();
        assert!(cols.contains(&"sctr") && cols.contains(&"cce"), "{h}");
    }
    assert!(!out.path().join("sample/P+C").exists());
}

#[test]
fn stats_over_a_results_file() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let mut text = String::from("project,classifier,set_id,auroc,f1,mcc,precision,recall\n");
    for (p, project) in ["alpha", "beta", "gamma", "delta"].iter().enumerate() {
        for (c, classifier) in ["logistic-regression", "random-forest", "gradient-boosting"]
            .iter()
            .enumerate()
        {
            for (s, set) in ["P+C", "P+Co", "P+C+Co"].iter().enumerate() {
                let v = 0.6 + 0.05 * s as f64 + 0.01 * ((p + c) % 3) as f64;
                text.push_str(&format!("{project},{classifier},{set},{v},{v},{v},{v},{v}\n"));
            }
        }
    }
    std::fs::write(&results, text).unwrap();
    let o = cochange(&[
        "stats",
        results.to_str().unwrap(),
        "--outdir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stats = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    let lines: Vec<&str> = stats.lines().collect();
    assert_eq!(
        lines[0],
        "metric,test,comparison,statistic,p_value,critical_difference,significant"
    );
    // one Friedman row and three pairwise rows per evaluation metric
    assert_eq!(lines.len(), 1 + 5 * 4);
    assert_eq!(lines.iter().filter(|l| l.contains(",friedman,")).count(), 5);
}

#[test]
fn unknown_alpha_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    std::fs::write(&results, "project,classifier,set_id,auroc,f1,mcc,precision,recall\n").unwrap();
    let o = cochange(&["stats", results.to_str().unwrap(), "--alpha", "0.2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_with_io_status() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let o = cochange(&["ingest", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.toml"), "{}", stderr(&o));
}

#[test]
fn pipeline_is_idempotent() {
    let out = tempfile::tempdir().unwrap();
    let config = fixture("sample/sample.toml");
    let run = || {
        let o = cochange(&[
            "pipeline",
            "--config",
            config.to_str().unwrap(),
            "--outdir",
            out.path().to_str().unwrap(),
            "--jobs",
            "2",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut files: Vec<(String, Vec<u8>)> = stdout(&o)
            .lines()
            .map(|l| {
                let path = l.strip_prefix("wrote ").unwrap();
                (path.to_owned(), std::fs::read(path).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let first = run();
    assert_eq!(first.len(), 21);
    assert_eq!(first, run());
}
