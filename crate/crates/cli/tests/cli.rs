use std::path::Path;
use std::process::{Command, Output};

fn exmerge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exmerge"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn dist_prints_the_value() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "mu.txt", "0 0.5\n1 0.5\n");
    write(dir.path(), "nu.txt", "# space: real\n0.25 1\n");
    let out = exmerge(&["dist", "--metric", "w1", "mu.txt", "nu.txt"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.5\n");

    // (0.5 * 0.25^2 + 0.5 * 0.75^2)^(1/2)
    let out = exmerge(&["dist", "--metric", "w1", "--p", "2", "mu.txt", "nu.txt"], dir.path());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.3125f64.sqrt()).abs() < 1e-11);
}

#[test]
fn dist_on_labels() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.txt", "# space: finite x y z\nx 0.5\ny 0.3\nz 0.2\n");
    write(dir.path(), "b.txt", "# space: finite x y z\nx 0.2\ny 0.3\nz 0.5\n");
    let value = |metric: &str| -> f64 {
        let out = exmerge(&["dist", "--metric", metric, "a.txt", "b.txt"], dir.path());
        assert!(out.status.success(), "{metric}");
        stdout(&out).trim().parse().unwrap()
    };
    assert_eq!(value("prokhorov"), 0.3);
    assert_eq!(value("w1"), 0.3);
    let (fm, dw) = (value("fm"), value("dW"));
    assert!(fm > 0.0 && fm <= 0.3);
    assert!(dw > 0.0 && dw <= 1.0);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "real.txt", "0 1\n");
    write(dir.path(), "labels.txt", "# space: finite a b\na 1\n");
    let out = exmerge(&["dist", "--metric", "w1", "real.txt", "labels.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = exmerge(&["dist", "--metric", "prokhorov", "--p", "2", "real.txt", "real.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = exmerge(&["dist", "--metric", "w1", "missing.txt", "real.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    write(dir.path(), "bad.toml", "name = \"bad\"\nunknown_key = 1\n");
    let out = exmerge(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = exmerge(&["oracle-check", "--seed", "7", "--pairs", "40"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{text}");
}

const SMALL: &str = r#"
name = "small"
experiment = "posterior"
theorem = "P"
seed = 11
replicates = 8
posterior_count = 200

[schedule]
n_min = 32
n_hi = 20000
ratio = 1.5

[model]
kind = "finite_dirichlet"
k = 3
a = 1.0
"#;

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "small.toml", SMALL);
    let out = exmerge(&["simulate", "--config", "small.toml", "--out", "res", "--threads", "2"], dir.path());
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("PASS coverage posterior_P"), "{text}");
    for f in ["small.csv", "small_summary.csv", "small_posterior_P.svg"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("res/small.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8 * rows_per_replicate(&csv));

    // `rates` switches the theorem and keeps the rest of the config.
    let out = exmerge(
        &["rates", "--config", "small.toml", "--theorem", "w", "--replicates", "3", "--out", "w"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("posterior_W"));
}

fn rows_per_replicate(csv: &str) -> usize {
    csv.lines().skip(1).filter(|l| l.split(',').nth(1) == Some("0")).count()
}

#[test]
fn failed_checks_exit_with_two() {
    // A schedule spanning one decade cannot show a tenfold decay at the
    // Prokhorov posterior rate.
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("n_hi = 20000", "n_hi = 320");
    write(dir.path(), "short.toml", &cfg);
    let out = exmerge(&["simulate", "--config", "short.toml", "--out", "."], dir.path());
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(2), "{text}");
    assert!(text.contains("FAIL decay"), "{text}");
}
