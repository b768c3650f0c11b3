//! End-to-end checks of `phinv verify`: the check battery passes on sound
//! scenarios, fails loudly when the drive sign is flipped, reduces to exact
//! zeros for the static oscillator, and refuses scenarios whose metric
//! cannot be represented at double precision.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phinv"))
        .args(args)
        .output()
        .expect("phinv binary should run")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).expect("config written");
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).expect("json readable")).expect("json parses")
}

/// Look up one verdict from `report.json` by name.
fn check<'a>(report: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

/// The linearly driven oscillator passes the whole battery.  The interior
/// band is widened to 28 levels because by t = 1 the metric's condition
/// number reaches ~1e9 and conjugation by the truncated metric corrupts a
/// deep skirt of edge levels; the default band of D/8 is too thin here.
#[test]
fn verify_passes_on_linear_drive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.0)\nlambda = linear(1.0)\nn = [0]\nedge_band = 28\n",
    );
    let out = dir.path().join("out");

    let run = phinv(&["verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("overall: PASS"), "stdout: {stdout}");

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["command"], "verify");
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 10, "ten named verdicts");
    for c in checks {
        assert_eq!(c["pass"], true, "check {} failed: {}", c["name"], c["residual"]);
    }

    // The raw measurements behind the verdicts are machine-readable too.
    let residuals = read_json(&out.join("residuals.json"));
    let records = residuals.as_array().unwrap();
    assert!(records.len() >= 50, "per-time records for each check");
    for rec in records {
        for field in ["check", "t", "dim", "dt", "edge_band", "residual", "condition_eta"] {
            assert!(!rec[field].is_null(), "record field {field} present");
        }
    }
    assert!(
        records.iter().any(|r| r["check"] == "ph_relation"),
        "pseudo-Hermiticity relation is recorded"
    );
}

/// Negating the imaginary drive inside the Hamiltonian (only there: the
/// auxiliary ODEs keep the original sign) breaks the pseudo-Hermiticity
/// relation, the twin Schroedinger equations, and the propagation check by
/// many orders of magnitude.  Exit code 1 distinguishes this from a crash.
#[test]
fn verify_flip_lambda_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.0)\nlambda = linear(1.0)\nn = [0]\nedge_band = 28\n",
    );
    let out = dir.path().join("out");

    let run = phinv(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--flip-lambda",
    ]);
    assert_eq!(run.status.code(), Some(1), "flipped drive must fail the battery");
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("overall: FAIL"), "stdout: {stdout}");

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["pass"], false);
    assert_eq!(report["flip_lambda"], true);
    for name in ["ph_relation", "tdse", "propagate"] {
        let c = check(&report, name);
        assert_eq!(c["pass"], false, "{name} should fail");
        assert!(
            c["residual"].as_f64().unwrap() > 1e-2,
            "{name} residual should be huge, got {}",
            c["residual"]
        );
    }
}

/// With lambda = 0 the metric is the identity and every operator identity
/// in the battery is exact: the four Fock-basis residuals vanish to
/// rounding.  This pins the battery's zero point.
#[test]
fn verify_static_oscillator_identities_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "omega = const(1.0)\nlambda = const(0.0)\nn = [0]\n");
    let out = dir.path().join("out");

    let run = phinv(&["verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&run.stderr));

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["pass"], true);
    for name in ["ph_relation", "liouville", "similarity", "explicit_h"] {
        let r = check(&report, name)["residual"].as_f64().unwrap();
        assert!(r < 1e-10, "{name} should vanish for the static oscillator, got {r}");
    }
}

/// A strongly displaced drive pushes the metric exponent's norm past the
/// point where exp(B) stays positive definite in double precision; the
/// battery must refuse to certify such a scenario (usage error, exit 2)
/// rather than emit garbage residuals.
#[test]
fn verify_rejects_unrepresentable_metric() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.0)\nlambda = linear(1.0)\nalpha_dot0 = -2.0\nn = [0]\n",
    );
    let out = dir.path().join("out");

    let run = phinv(&["verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("positivity"), "stderr should explain the refusal: {stderr}");
}
