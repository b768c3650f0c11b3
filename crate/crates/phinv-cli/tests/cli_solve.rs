//! End-to-end checks of `phinv solve`: artifact layout, closed-form
//! observables in the emitted CSV files, byte-level determinism, and usage
//! error reporting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Run the compiled `phinv` binary with the given arguments.
fn phinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phinv"))
        .args(args)
        .output()
        .expect("phinv binary should run")
}

/// Write a scenario config into `dir` and return its path.
fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).expect("config written");
    path
}

/// Parse a CSV of floats (header + data rows) into rows of `f64` columns.
fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).expect("csv readable");
    let mut lines = text.lines();
    let header = lines.next().expect("csv has a header").to_string();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().expect("numeric field"))
                .collect()
        })
        .collect();
    (header, rows)
}

/// A forced oscillator with the drive-matched initial condition has the
/// closed-form phase -(n + 1/2) w0 t - a^2 t^3 / (6 hbar m w0^2) and mean
/// energy hbar w0 (n + 1/2); the metric-weighted norm stays at one.  All
/// three must show up in `observables_n0.csv` at the final report time.
#[test]
fn solve_matched_drive_reports_closed_form_observables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.0)\nlambda = linear(1.0)\nalpha_dot0 = -2.0\nn = [0]\n",
    );
    let out = dir.path().join("out");

    let run = phinv(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&run.stderr));

    for name in [
        "aux_trace.csv",
        "phase_n0.csv",
        "observables_n0.csv",
        "wavesample_n0.csv",
        "report.json",
    ] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }

    let (header, rows) = read_csv(&out.join("observables_n0.csv"));
    assert_eq!(header, "t,eps,mean_H_eta,eta_norm");
    assert_eq!(rows.len(), 11, "one row per report time");
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12, "final report time");
    assert!((last[1] - (-2.0 / 3.0)).abs() < 1e-6, "eps(1) = -2/3, got {}", last[1]);
    assert!((last[2] - 0.5).abs() < 1e-6, "mean energy hbar w0 / 2, got {}", last[2]);
    assert!((last[3] - 1.0).abs() < 1e-6, "eta-norm conserved, got {}", last[3]);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "solve");
    assert_eq!(report["pass"], true);
    assert_eq!(report["artifacts"].as_array().unwrap().len(), 4);
}

/// With the drive switched off the modes are stationary: eps_n(t) =
/// -(n + 1/2) w0 t exactly (the quadrature integrand is constant) and the
/// mean energy column is flat at hbar w0 (n + 1/2) for every report time.
#[test]
fn solve_static_oscillator_has_level_spaced_energies() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.5)\nlambda = const(0.0)\nn = [0, 2]\n",
    );
    let out = dir.path().join("out");

    let run = phinv(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&run.stderr));

    for (n, level) in [(0usize, 0.5), (2usize, 2.5)] {
        let (_, rows) = read_csv(&out.join(format!("observables_n{n}.csv")));
        for row in &rows {
            let (t, eps, mean, norm) = (row[0], row[1], row[2], row[3]);
            assert!((eps - (-level * 1.5 * t)).abs() < 1e-9, "n={n} eps at t={t}");
            assert!((mean - 1.5 * level).abs() < 1e-9, "n={n} mean energy at t={t}");
            assert!((norm - 1.0).abs() < 1e-6, "n={n} eta-norm at t={t}");
        }
    }

    let (header, rows) = read_csv(&out.join("wavesample_n0.csv"));
    assert_eq!(header, "x,re,im,abs2");
    assert!(rows.len() > 1000, "one row per grid point");
}

/// Two runs of the same config must produce byte-identical artifacts: the
/// outputs carry no timestamps and all floats are printed with a fixed
/// format, so diffing run directories is a meaningful regression check.
#[test]
fn solve_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "omega = const(1.0)\nlambda = linear(1.0)\nalpha_dot0 = -2.0\nn = [0]\n",
    );
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        let run = phinv(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(0));
    }

    let mut names: Vec<_> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for name in names {
        let a = fs::read(out_a.join(&name)).unwrap();
        let b = fs::read(out_b.join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
}

/// Missing files and invalid scenarios are usage errors: exit code 2 with a
/// diagnostic on stderr, distinct from exit code 1 (a failed check).
#[test]
fn solve_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let run = phinv(&["solve", "--config", "/nonexistent/path.cfg", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!run.stderr.is_empty(), "diagnostic expected on stderr");

    let config = write_config(dir.path(), "omega = const(-1.0)\nlambda = const(0.0)\n");
    let run = phinv(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("omega"), "stderr should name the bad key: {stderr}");
}
