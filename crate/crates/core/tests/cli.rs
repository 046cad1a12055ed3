use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-anm")).args(args).output().unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn smoke_run_writes_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = cli(&["--scenario", "fig3", "--trials", "10", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(data_rows(&csv).len(), 5 * 8);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("snr")).count(), 5);
    // no stray temporary files
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn missing_scenario_and_config_is_usage_error() {
    let o = cli(&["--trials", "3", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--scenario"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(cli(&["--scenario", "fig9", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(cli(&["--scenario", "fig3", "--trials", "0", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(cli(&["--scenario", "fig3", "--bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["--scenario", "fig3", "--mu", "auto:-1", "--out", "x.csv"]).status.code(), Some(1));
    assert_eq!(cli(&["--scenario", "fig3"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn snr_list_overrides_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = cli(&["--scenario", "fig4", "--snr-list", "-10,0", "--trials", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut snrs: Vec<&str> = data_rows(&csv).iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    snrs.dedup();
    assert_eq!(snrs, ["-10.0", "0.0"]);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = cli(&["--scenario", "fig5", "--snr-list", "0", "--trials", "2", "--seed", "42", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn config_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    let out = dir.path().join("r.csv");
    fs::write(
        &cfg,
        format!(
            "# custom LoS run\nscenario = custom\nsnr_db_grid = 0\ntrials = 1\nseed = 5\nmu = auto:1.5\noutput_path = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = cli(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# mu=auto:1.5"));
    assert!(csv.contains("# seed=5"));
    assert_eq!(data_rows(&csv).len(), 8 + 4);

    fs::write(&cfg, "scenario = custom\nwidgets = 3\n").unwrap();
    let o = cli(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_runtime_error() {
    let o = cli(&["--scenario", "fig3", "--snr-list", "0", "--trials", "1", "--out", "/nonexistent-dir/r.csv"]);
    assert_eq!(o.status.code(), Some(2));
}
