use std::path::Path;
use std::process::{Command, Output};

use gscm::experiment::{read_csv, CSV_HEADER};

fn gscm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gscm"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_config_prints_filled_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ok.cfg",
        "# drift run\nclusters = 5\nseeds = 1..3\n",
    );
    let o = gscm(&["validate-config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("seeds = 1, 2, 3"));
    assert!(text.contains("bandwidth_hz = 18000000"));
}

#[test]
fn config_errors_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        ("bandwidth_hz = 18 MHz\n", "units belong in the key name"),
        (
            "clusters = 5\ncarier_frequency_hz = 2e9\n",
            "unknown key `carier_frequency_hz`",
        ),
        ("track_step_m = 0\n", "track_step_m"),
        ("seeds = \n", "seeds"),
    ] {
        let cfg = write(dir.path(), "bad.cfg", text);
        let o = gscm(&["validate-config", &cfg]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(stderr(&o).contains(needle), "{text}: {}", stderr(&o));
    }
    let o = gscm(&["validate-config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gscm(&["run", "--seed-list", "3..1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "seeds = 1\ntrack_samples = 3\n");
    let out = dir.path().join("missing").join("out.csv");
    let o = gscm(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing"));
}

#[test]
fn run_writes_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.cfg",
        "decorr_distances_m = 0, 15\ntrack_samples = 21\ntrack_step_m = 1\noutput_path = sweep.csv\n",
    );
    let o = gscm(&["run", &cfg, "--seed-list", "5,6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = dir.path().join("sweep.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = read_csv(&csv).unwrap();
    assert_eq!(records.len(), 21 * 2 * 2);
    assert!(records.iter().all(|r| r.seed == 5 || r.seed == 6));
    assert_eq!(records.last().unwrap().separation, 20.0);
    assert!(records
        .iter()
        .all(|r| (0.0..=1.0 + 1e-12).contains(&r.cmd) && r.chordal >= 0.0));
}

#[test]
fn sos_selftest_passes() {
    let o = gscm(&["sos-selftest", "--sinusoids", "500"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
