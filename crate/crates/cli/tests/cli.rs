use std::fs;
use std::process::{Command, Output};

use gspin::{read_result, ResultFile};

fn gspin(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gspin"));
    cmd.args(args).env_remove("GSPIN_CONFIG_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn odmr_with_defaults_writes_two_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("odmr.tsv");
    let o = gspin(&["odmr", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_result(&out).unwrap();
    let c1: f64 = r.meta("summary.peak_1_center").unwrap().split(' ').next().unwrap().parse().unwrap();
    let c2: f64 = r.meta("summary.peak_2_center").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((c1 - 690.0).abs() < 10.0 && (c2 - 1730.0).abs() < 10.0);
    assert!(r.columns.iter().all(|c| !c.unit.is_empty()));
}

#[test]
fn exit_codes() {
    let o = gspin(&["nmr"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = gspin(&["odmr", "--set", "novalue"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = gspin(&["lac-sweep", "--set", "zfs.e=1300", "--out", "/dev/null"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zfs.e"), "{}", stderr(&o));
    let o = gspin(&["odmr", "--config", "/nonexistent/gspin.toml"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_errors_name_key_or_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[rates]\ntau_zero = 2.0\n").unwrap();
    let o = gspin(&["rabi", "--config", bad.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tau_zero"), "{}", stderr(&o));
    fs::write(&bad, "[rates\n").unwrap();
    let o = gspin(&["rabi", "--config", bad.to_str().unwrap()], &[]);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn config_dir_from_environment_and_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("gspin.toml"), "[trpl_diff]\nstart = 2.0\nstop = 40.0\nstep = 2.0\n").unwrap();
    let d = dir.path().to_str().unwrap();
    let a = gspin(&["trpl-diff"], &[("GSPIN_CONFIG_DIR", d), ("SOURCE_DATE_EPOCH", "1")]);
    let b = gspin(&["trpl-diff"], &[("GSPIN_CONFIG_DIR", d), ("SOURCE_DATE_EPOCH", "2")]);
    assert!(a.status.success(), "{}", stderr(&a));
    let ra = ResultFile::parse(&String::from_utf8(a.stdout).unwrap()).unwrap();
    let rb = ResultFile::parse(&String::from_utf8(b.stdout).unwrap()).unwrap();
    assert_eq!(ra.rows(), 20);
    assert_eq!(ra.data_text(), rb.data_text());
    assert_eq!(ra.meta("config_hash"), rb.meta("config_hash"));
    assert_ne!(ra.meta("timestamp_unix"), rb.meta("timestamp_unix"));
}

#[test]
fn compare_subcommand_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.json");
    assert!(gspin(&["field-split", "--out", a.to_str().unwrap()], &[]).status.success());
    assert!(gspin(&["field-split", "--out", b.to_str().unwrap(), "--set", "zfs.gamma_e=-28.1"], &[]).status.success());
    let same = gspin(&["compare", a.to_str().unwrap(), a.to_str().unwrap()], &[]);
    assert!(same.status.success());
    let diff = gspin(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--rel-tol", "1e-9"], &[]);
    assert_eq!(diff.status.code(), Some(1));
    let table = String::from_utf8(diff.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("family_1\t")), "{table}");
}

#[test]
fn show_config_prints_hash_and_overrides() {
    let o = gspin(&["show-config", "--set", "seed=5"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# config_hash: "));
    assert!(text.contains("seed = 5"));
}
