use std::process::Command;

use bohrstrip::experiments::{BoundsReport, ConvergenceReport, TabularReport, VerificationReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bohrstrip"))
}

#[test]
fn bounds_csv_reads_back() {
    let out = bin().args(["bounds", "--M", "3", "--rho", "3/4,1,1", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = BoundsReport::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(r.schema_version, 1);
    let gap = r.rows.iter().find(|x| x.quantity == "sigmaB_minus_sigmaC").unwrap();
    assert_eq!(gap.exact.as_deref(), Some("1/36"));
}

#[test]
fn verify_writes_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let status = bin()
        .args(["verify", "--Lmax", "4", "--seed", "9", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r = VerificationReport::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r.passed);
    assert_eq!(r.config.seed, 9);
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        vec!["bounds", "--rho", "1,2"],
        vec!["bounds", "--M", "3", "--rho", "1,1"],
        vec!["converge", "--M", "3", "--rho", "1,1,1"],
        vec!["bounds", "--format", "xml"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = bin().args(["converge", "--M", "3", "--rho", "1,1,1"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive"));
}

#[test]
fn failed_assertion_exits_1() {
    // sigma beyond the absolute-convergence bound: the divergence assertions fail
    let out = bin().args(["diverge", "--sigma", "0.35", "--Lmax", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_emits_report() {
    let out = bin()
        .args(["converge", "--M", "3", "--rho", "3/4,1,1", "--Lmax", "4", "--format", "csv"])
        .output()
        .unwrap();
    let r = ConvergenceReport::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.decomposition_ok);
    assert_eq!(out.status.code(), Some(if r.passed() { 0 } else { 1 }));
}

#[test]
fn kronecker_subcommand() {
    let out = bin().args(["kronecker", "--K", "0.125", "--delta", "0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["L_K"], 1);
    assert_eq!(v["achieved"], true);
}

#[test]
fn help_documents_columns() {
    let out = bin().args(["bounded", "--help"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns: L,maxAbs"));
}
