use std::fs;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_pfrac");

fn write_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("bar.toml");
    fs::write(
        &path,
        "[problem]\nkind = \"bar1d\"\n\n[mesh]\nn = 30\n\n[loading]\nrate = 0.02\nsteps = [{ dt = 1.0, until = 60.0 }]\n",
    )
    .unwrap();
    path
}

#[test]
fn run_writes_per_step_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    let output = Command::new(BIN)
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--scheme", "S2", "--out"])
        .arg(&out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = fs::read_to_string(out.join("bar1d_S2.csv")).unwrap();
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn sweep_writes_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("sweep");
    let output = Command::new(BIN)
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--schemes", "all", "--out"])
        .arg(&out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = fs::read_to_string(out.join("bar1d_sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,max_n_stag,total_n_stag,total_nr_u,total_nr_d,peak_force"));
    let schemes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(schemes, ["ST", "S1", "S2", "S3"]);
}

#[test]
fn bad_config_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[problem]\nkind = \"tensile\"\n[mesh]\nnx = 4\nwidth = 2\n").unwrap();
    let output = Command::new(BIN).args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn unknown_scheme_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let output = Command::new(BIN)
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--scheme", "S4"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}
