//! End-to-end checks of the command-line surface: exit codes, JSON output
//! shapes, manifest digests and sweep determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toruslab"))
}

fn run_json(args: &[&str]) -> serde_json::Value {
    let out = bin().args(args).output().expect("spawn toruslab");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout JSON")
}

#[test]
fn convergents_json_golden_values() {
    let v = run_json(&["convergents", "--quotients", "0,2,2,2,2,2", "--json"]);
    assert_eq!(v["angle"]["value"], "29/70");
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows[3]["q"], "12");
    assert_eq!(rows[3]["p"], "5");
}

#[test]
fn usage_errors_are_machine_readable() {
    let out = bin().args(["convergents"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr JSON");
    assert!(err["error"].is_string());

    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn verify_reports_and_exit_codes() {
    let v = run_json(&["verify", "theta-symmetry", "--samples", "25", "--json"]);
    assert_eq!(v["passes"], 25);
    assert_eq!(v["inequality_failures"], 0);

    // unknown lemma tags are usage errors
    let out = bin().args(["verify", "no-such-lemma"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_lemma_size_exact() {
    let v = run_json(&[
        "verify",
        "lemma-size",
        "--quotients",
        "0,2,2,2,2,2,2,2,2",
        "--level",
        "3",
        "--ell",
        "1",
        "--json",
    ]);
    assert_eq!(v["passes"], 1);
    assert_eq!(v["inequality_failures"], 0);
}

#[test]
fn theta_exact_output() {
    let v = run_json(&[
        "theta",
        "--quotients",
        "0,2,2,2,2,2,2,2,2,2,2,2",
        "--x",
        "1/7",
        "--beta",
        "1/3",
        "--n",
        "10",
        "--mode",
        "exact",
        "--json",
    ]);
    let exact = v["theta_exact"].as_str().unwrap();
    assert!(exact.contains('/'));
    // β = 0 gives Θ = 1 exactly
    let v = run_json(&[
        "theta",
        "--quotients",
        "0,2,2,2,2,2,2,2,2,2,2,2",
        "--x",
        "1/7",
        "--beta",
        "0",
        "--n",
        "10",
        "--mode",
        "exact",
        "--json",
    ]);
    assert_eq!(v["theta_exact"], "1/1");
}

#[test]
fn sweep_is_deterministic_and_resumable() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [&dir1, &dir2] {
        let out = bin()
            .args(["sweep", "--out", dir.path().to_str().unwrap()])
            .env("TORUSLAB_THREADS", "2")
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let csv1 = std::fs::read_to_string(dir1.path().join("sweep.csv")).unwrap();
    let csv2 = std::fs::read_to_string(dir2.path().join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv2, "sweep output not deterministic");
    assert_eq!(csv1.lines().count(), 13); // header + 12 cells
                                          // a rerun over an existing sweep.csv reuses completed rows
    let out = bin()
        .args(["sweep", "--out", dir1.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv3 = std::fs::read_to_string(dir1.path().join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv3);
}

#[test]
fn sweep_verdicts_match_theorem_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let find = |angle: &str, recipe: &str| -> String {
        csv.lines()
            .find(|l| l.contains(&format!(",{angle},{recipe},")))
            .unwrap_or_else(|| panic!("no row for {angle}/{recipe}"))
            .to_string()
    };
    assert!(find("sqrt2", "same-orbit").contains(",historic,"));
    assert!(find("sqrt2", "same-orbit").contains("[mu_infinity; delta_p]"));
    assert!(find("w-1-3", "rational-third").contains(",extreme-historic,"));
    assert!(find("rapid-growth", "beta0-offset").contains(",physical-measure,"));
    assert!(find("golden", "same-orbit").contains(",no-theorem-applies,"));
}

#[test]
fn classify_emits_certificates_and_verdict() {
    let v = run_json(&[
        "classify",
        "--quotients",
        "0,2,2,2,2,2,2,2,2,2,2,2,2,2",
        "--depth",
        "10",
        "--p",
        "1/2,3/10",
        "--q",
        "0,157/100",
        "--x0",
        "1/4",
        "--json",
    ]);
    assert_eq!(v["w_membership"]["verdict_strength"], "consistent-with");
    assert!(v["verdict"]["regime"].is_string());
    // certificates re-checkable: witnesses carry both sides
    if let Some(w) = v["w_membership"]["witnesses"]
        .as_array()
        .and_then(|a| a.first())
    {
        assert!(w["lhs"].is_string() && w["rhs"].is_string());
    }
}

#[test]
fn construct_angle_and_badsets_commands() {
    let v = run_json(&[
        "construct-angle",
        "--kind",
        "rapid",
        "--c",
        "1",
        "--gamma",
        "0.5",
        "--levels",
        "4",
        "--json",
    ]);
    let quotients = v["angle"]["quotients"].as_array().unwrap();
    assert!(quotients.len() >= 7);

    let v = run_json(&[
        "badsets",
        "--quotients",
        "0,2,3,5,4,6,2,2,2",
        "--level",
        "3",
        "--json",
    ]);
    assert!(v["d_n"]["measure_dec"].as_f64().unwrap() > 0.0);
    assert_eq!(v["ledger"].as_array().unwrap().len(), 2);
    assert_eq!(v["v_checks_ok"], true);
}

#[test]
fn birkhoff_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "birkhoff",
            "--quotients",
            "0,2,2,2,2,2,2,2,2",
            "--x",
            "1/7",
            "--n",
            "50",
            "--mode",
            "exact",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("birkhoff.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,S_n,mode,condition_flag"));
    let first = lines.next().unwrap();
    // 18 significant digits in scientific notation, exact mode, clear flag
    assert!(first.starts_with("1,") && first.ends_with(",exact,0"));
    let mantissa = first.split(',').nth(1).unwrap();
    assert!(mantissa.contains('e') && mantissa.splitn(2, '.').nth(1).unwrap().len() >= 18);
    check_manifest(dir.path());
}

#[test]
fn special_flow_manifest_digests() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "simulate",
            "special",
            "--quotients",
            "0,2,2,2,2,2,2,2,2,2,2,2,2,2",
            "--returns",
            "5000",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    check_manifest(dir.path());
    let csv = std::fs::read_to_string(dir.path().join("special.csv")).unwrap();
    assert!(csv.starts_with("n,T_n,A_n,B_n,C_n,occ_p,occ_q,theta_proxy\n"));
}

fn check_manifest(dir: &Path) {
    use sha2::Digest;
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for output in manifest["outputs"].as_array().unwrap() {
        let body = std::fs::read(dir.join(output["path"].as_str().unwrap())).unwrap();
        let digest = format!("{:x}", sha2::Sha256::digest(&body));
        assert_eq!(
            digest,
            output["sha256"].as_str().unwrap(),
            "digest mismatch for {}",
            output["path"]
        );
    }
}
