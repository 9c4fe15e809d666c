use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thz-bgsr"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_accepts_empty_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{}");
    let out = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("preset desk"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"num_userz": 3}"#);
    let out = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_userz"));
}

#[test]
fn bad_flag_values_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{}");
    let csv = dir.path().join("o.csv");
    for extra in [["--algorithms", "lasso"], ["--adc-bits", "zero"], ["--dict", "fine"], ["--snr", "ten"]] {
        let out = bin().args(["run", "--config"]).arg(&cfg).args(extra).arg("--out").arg(&csv).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{extra:?}");
    }
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
}

#[test]
fn run_writes_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"trials": 2, "snr_db_list": [10]}"#);
    let csv = dir.path().join("o.csv");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--algorithms", "gsmp,omp,genie", "--seed", "4", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["sweep_value", "algorithm", "metric", "mean", "stderr", "trials", "config_hash", "seed", "revision"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().any(|r| &r[1] == "gsmp" && &r[2] == "nmse_db"));
    assert!(rows.iter().any(|r| &r[1] == "genie" && &r[2] == "ber"));
    assert!(!rows.iter().any(|r| &r[1] == "genie" && &r[2] == "nmse"));
    assert!(rows.iter().all(|r| &r[5] == "2" && &r[7] == "4"));
}

#[test]
fn bcrb_command_writes_only_bound_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"trials": 2, "snr_db_list": [5]}"#);
    let csv = dir.path().join("b.csv");
    let out = bin().args(["bcrb", "--config"]).arg(&cfg).arg("--out").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[1] == "bcrb"));
}
