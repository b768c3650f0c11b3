//! Batch front end for the pseudo-Hermitian oscillator library:
//!
//! ```text
//! phinv solve  --config <path> --out <dir>
//! phinv verify --config <path> --out <dir> [--flip-lambda]
//! phinv sweep  --config <path> --out <dir> --param <p> --values <list> [--workers k]
//! ```
//!
//! Exit codes: 0 — every check passed, 1 — at least one check failed,
//! 2 — usage or configuration error.  Every data file under `--out` is
//! byte-deterministic for a given config and build (`{:.16e}` floats, no
//! timestamps) and written atomically (temp + rename); wall-clock timings go
//! to the console only.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use phinv::auxsolve::AuxTrace;
use phinv::operators::{FockModel, ResidualRecord};
use phinv::oracle::{eta_norm, overlap_phase, propagate, tdse_residual, Grid};
use phinv::scenario::{parse_scenario_with_base, CoeffSpec, Scenario};
use phinv::states::{
    check_phase_reality, mean_h_eta, phase, phi_ph, solution_phi, solution_phi_at,
};

const TAU: f64 = std::f64::consts::TAU;

#[derive(Parser)]
#[command(
    name = "phinv",
    version,
    about = "Time-dependent non-Hermitian oscillator: solve scenarios, verify \
             the operator identities, sweep parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the scenario: auxiliary functions, phases, wavefunctions,
    /// per-time observables.
    Solve(Common),
    /// Run the full check battery (Fock-basis operator identities, TDSE
    /// residuals, propagation comparison); exit 1 if any verdict fails.
    Verify(Common),
    /// Re-run the check battery across a parameter range; emit a long-format
    /// CSV (`param,value,check,residual`) for convergence plots.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for sweep points (solve/verify ignore it).
    #[arg(long, default_value_t = 1, value_name = "K")]
    workers: usize,
    /// Debug: negate λ(t) wherever the Hamiltonian is assembled, leaving the
    /// closed-form states and the metric on the true λ — the checks must
    /// then fail loudly (harness sensitivity test).
    #[arg(long)]
    flip_lambda: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    param: SweepParam,
    /// Comma-separated values, e.g. `1e-3,5e-4,2.5e-4`.
    #[arg(long, value_name = "LIST")]
    values: String,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SweepParam {
    /// Drive slope: sets λ = a·t.
    #[value(name = "a")]
    DriveSlope,
    /// Base frequency of a const or sin_mod ω.
    #[value(name = "omega0")]
    Omega0,
    /// Mode index (replaces the scenario's list).
    #[value(name = "n")]
    ModeIndex,
    /// Time step: sets both the propagation step and the centered-difference
    /// step of the residual checks.
    #[value(name = "dt")]
    TimeStep,
    /// Spatial grid point count.
    #[value(name = "N")]
    GridPoints,
    /// Fock truncation dimension (edge band follows as D/8 unless set).
    #[value(name = "fock_dim")]
    FockDim,
}

impl SweepParam {
    fn label(self) -> &'static str {
        match self {
            SweepParam::DriveSlope => "a",
            SweepParam::Omega0 => "omega0",
            SweepParam::ModeIndex => "n",
            SweepParam::TimeStep => "dt",
            SweepParam::GridPoints => "N",
            SweepParam::FockDim => "fock_dim",
        }
    }
}

/// One named verdict of the battery: worst residual vs its tolerance.
#[derive(Serialize)]
struct CheckVerdict {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

/// The JSON report written by every command.  Reproducible given the same
/// config and build: no timestamps, no host information.
#[derive(Serialize)]
struct RunReport {
    command: String,
    scenario: String,
    flip_lambda: bool,
    artifacts: Vec<String>,
    checks: Vec<CheckVerdict>,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Cmd::Solve(common) => cmd_solve(common),
        Cmd::Verify(common) => cmd_verify(common),
        Cmd::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(common: &Common) -> Result<Scenario> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading config {}", common.config.display()))?;
    let base = common.config.parent().unwrap_or(Path::new("."));
    let mut s = parse_scenario_with_base(&text, base)
        .with_context(|| format!("parsing config {}", common.config.display()))?;
    s.flip_lambda = common.flip_lambda;
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output dir {}", common.out.display()))?;
    Ok(s)
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".tmp.{name}"));
    fs::write(&tmp, contents).with_context(|| format!("writing {name}"))?;
    fs::rename(&tmp, dir.join(name)).with_context(|| format!("renaming {name}"))?;
    Ok(())
}

fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_atomic(dir, "report.json", json.as_bytes())
}

/// Eleven uniformly spaced report/sweep times over the scenario interval,
/// as mesh indices.
fn report_indices(aux: &AuxTrace) -> Vec<usize> {
    let steps = aux.mesh.len() - 1;
    (0..=10).map(|j| ((j * steps) as f64 / 10.0).round() as usize).collect()
}

/// Solve-side artifacts for one scenario into one directory: auxiliary trace,
/// per-mode phase trace, observables at the report times, and the final-time
/// wavefunction sample.  Returns the file names written.
fn solve_artifacts(s: &Scenario, out: &Path) -> Result<Vec<String>> {
    let mut artifacts = Vec::new();

    let clock = Instant::now();
    let aux = AuxTrace::solve(s).context("stage auxsolve")?;
    println!("[solve] auxiliary ODEs: {:.2?}", clock.elapsed());

    let mut buf = Vec::new();
    aux.write_csv(&mut buf).context("stage auxsolve (csv)")?;
    write_atomic(out, "aux_trace.csv", &buf)?;
    artifacts.push("aux_trace.csv".to_string());

    let grid = Grid::new(s.grid_l, s.grid_n);
    let indices = report_indices(&aux);
    for &n in &s.quantum_n {
        let clock = Instant::now();
        let tr = phase(n, s, &aux).context("stage states (phase)")?;
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        let name = format!("phase_n{n}.csv");
        write_atomic(out, &name, &buf)?;
        artifacts.push(name);

        let mut obs = String::from("t,eps,mean_H_eta,eta_norm\n");
        for &k in &indices {
            let t = aux.mesh[k];
            let me = mean_h_eta(n, s, &aux, k).context("stage states (mean energy)")?;
            let sample = phi_ph(n, s, &aux, k, &grid).context("stage states (phi)")?;
            let en = eta_norm(&sample, s, &aux, t, s.k_cutoff).context("stage oracle (eta norm)")?;
            writeln!(
                obs,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                t, tr.eps[k], me.quadrature, en.value
            )?;
        }
        let name = format!("observables_n{n}.csv");
        write_atomic(out, &name, obs.as_bytes())?;
        artifacts.push(name);

        let sample = solution_phi(n, s, &aux, aux.mesh.len() - 1, &grid)
            .context("stage states (solution)")?;
        let mut buf = Vec::new();
        sample.write_csv(&mut buf)?;
        let name = format!("wavesample_n{n}.csv");
        write_atomic(out, &name, &buf)?;
        artifacts.push(name);
        println!("[solve] mode n = {n}: {:.2?}", clock.elapsed());
    }
    Ok(artifacts)
}

fn cmd_solve(common: &Common) -> Result<bool> {
    let s = load_scenario(common)?;
    let out = common.out.as_path();
    let artifacts = solve_artifacts(&s, out)?;
    let report = RunReport {
        command: "solve".into(),
        scenario: s.to_config_string(),
        flip_lambda: s.flip_lambda,
        artifacts,
        checks: Vec::new(),
        pass: true,
    };
    write_report(out, &report)?;
    println!("[solve] wrote {} files to {}", report.artifacts.len() + 1, out.display());
    Ok(true)
}

/// The full check battery over one scenario: Fock-basis operator identities
/// on an 11-point time sweep, TDSE residuals of the closed form, the
/// propagation comparison with η-norm bookkeeping, phase reality, and
/// overlap-phase extraction.  Returns every individual measurement plus one
/// verdict per named tolerance.
fn run_battery(s: &Scenario) -> Result<(Vec<ResidualRecord>, Vec<CheckVerdict>)> {
    let aux = AuxTrace::solve(s).context("stage auxsolve")?;
    let (t0, t1) = (s.t0, s.t1);
    let span = t1 - t0;
    let band = s.edge_band.unwrap_or(s.fock_dim / 8);
    let mut records = Vec::new();

    let fock_clock = Instant::now();
    let model = FockModel::new(s, &aux, s.fock_dim).context("stage operators")?;
    let reference = model.invariant_spectrum(t0, 8).context("stage operators (spectrum)")?;
    let mut worst = [0.0_f64; 5]; // ph, liouville, similarity, explicit, spectrum
    for j in 0..=10 {
        let t = t0 + span * j as f64 / 10.0;
        let kappa = model.condition_eta(t).context("stage operators")?;
        let ph = model.check_ph_relation(t, s.dt_fd, band).context("stage operators")?;
        let liou = model.check_liouville(t, s.dt_fd, band).context("stage operators")?;
        let sim = model.check_similarity(t, s.dt_fd, band).context("stage operators")?;
        let eigs = model.invariant_spectrum(t, 8).context("stage operators")?;
        let spectrum = eigs
            .iter()
            .zip(&reference)
            .enumerate()
            .map(|(n, (eig, base))| {
                let exact = s.hbar * (n as f64 + 0.5);
                let rel = (eig.re - exact).abs() / exact;
                rel.max(eig.im.abs()).max((eig - base).norm())
            })
            .fold(0.0_f64, f64::max);
        for (slot, (check, residual)) in [
            ("ph_relation", ph),
            ("liouville", liou),
            ("similarity", sim.invariant),
            ("explicit_h", sim.explicit_form),
            ("spectrum", spectrum),
        ]
        .into_iter()
        .enumerate()
        {
            worst[slot] = worst[slot].max(residual);
            records.push(ResidualRecord {
                check: check.into(),
                t,
                dim: s.fock_dim,
                dt: s.dt_fd,
                edge_band: band,
                residual,
                condition_eta: kappa,
            });
        }
    }
    println!("[verify] Fock-basis sweep (D = {}): {:.2?}", s.fock_dim, fock_clock.elapsed());

    let tdse_clock = Instant::now();
    let grid = Grid::new(s.grid_l, s.grid_n);
    let mut worst_tdse = 0.0_f64;
    let mut worst_phase_im = 0.0_f64;
    for &n in &s.quantum_n {
        let tr = phase(n, s, &aux).context("stage states (phase)")?;
        let builder = |t: f64| solution_phi_at(n, s, &aux, &tr, t, &grid);
        for frac in [0.25, 0.5, 1.0] {
            let t = t0 + span * frac;
            let r = tdse_residual(&builder, s, t, s.dt_fd).context("stage oracle (tdse)")?;
            worst_tdse = worst_tdse.max(r);
            records.push(ResidualRecord {
                check: format!("tdse_n{n}"),
                t,
                dim: s.grid_n,
                dt: s.dt_fd,
                edge_band: 0,
                residual: r,
                condition_eta: 0.0,
            });
        }
        let reality = check_phase_reality(n, s, &aux).context("stage states (reality)")?;
        worst_phase_im = worst_phase_im.max(reality.max_imag);
        records.push(ResidualRecord {
            check: format!("phase_im_n{n}"),
            t: t1,
            dim: s.grid_n,
            dt: 0.0,
            edge_band: 0,
            residual: reality.max_imag,
            condition_eta: 0.0,
        });
    }
    println!("[verify] TDSE residuals + phase reality: {:.2?}", tdse_clock.elapsed());

    let cn_clock = Instant::now();
    let n0 = s.quantum_n[0];
    let psi0 = solution_phi(n0, s, &aux, 0, &grid).context("stage states (initial)")?;
    let n_steps = ((span / s.dt).round() as usize).max(1);
    let run = propagate(&psi0, s, t0, t1, s.dt, (n_steps / 10).max(1))
        .context("stage oracle (propagate)")?;
    let target =
        solution_phi(n0, s, &aux, aux.mesh.len() - 1, &grid).context("stage states (target)")?;
    let distance = run.states.last().unwrap().l2_distance(&target);
    let eta_drift = run
        .eta_norm
        .iter()
        .map(|v| (v - run.eta_norm[0]).abs() / run.eta_norm[0])
        .fold(0.0_f64, f64::max);
    let plain_drift = (run.plain_norm.last().unwrap() - run.plain_norm[0]).abs();

    let reference = phi_ph(n0, s, &aux, aux.mesh.len() - 1, &grid)?;
    let measured = overlap_phase(&reference, run.states.last().unwrap(), s, &aux, t1, s.k_cutoff)
        .context("stage oracle (overlap)")?;
    let expected = phase(n0, s, &aux)?.eval(t1)?;
    let overlap_dev = ((measured - expected + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0).abs();
    println!("[verify] propagation oracle: {:.2?}", cn_clock.elapsed());

    for (check, residual) in [
        ("propagate_distance", distance),
        ("eta_drift", eta_drift),
        ("plain_drift", plain_drift),
        ("overlap_phase", overlap_dev),
    ] {
        records.push(ResidualRecord {
            check: check.into(),
            t: t1,
            dim: s.grid_n,
            dt: s.dt,
            edge_band: 0,
            residual,
            condition_eta: 0.0,
        });
    }

    let checks = vec![
        verdict("ph_relation", worst[0], s.tol.ph_relation),
        verdict("liouville", worst[1], s.tol.liouville),
        verdict("similarity", worst[2], s.tol.similarity),
        verdict("explicit_h", worst[3], s.tol.explicit_h),
        verdict("spectrum", worst[4], s.tol.spectrum),
        verdict("tdse", worst_tdse, s.tol.tdse),
        verdict("propagate", distance, s.tol.propagate),
        verdict("eta_drift", eta_drift, s.tol.eta_drift),
        verdict("phase_im", worst_phase_im, s.tol.phase_im),
        verdict("overlap_phase", overlap_dev, s.tol.overlap_phase),
    ];
    Ok((records, checks))
}

fn verdict(name: &str, residual: f64, tolerance: f64) -> CheckVerdict {
    CheckVerdict { name: name.into(), residual, tolerance, pass: residual < tolerance }
}

fn cmd_verify(common: &Common) -> Result<bool> {
    let s = load_scenario(common)?;
    let out = common.out.as_path();
    let (records, checks) = run_battery(&s)?;

    for c in &checks {
        println!(
            "check {:<18} residual {:>12.3e}  tolerance {:>8.0e}  {}",
            c.name,
            c.residual,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let pass = checks.iter().all(|c| c.pass);

    let mut json = serde_json::to_string_pretty(&records)?;
    json.push('\n');
    write_atomic(out, "residuals.json", json.as_bytes())?;
    let report = RunReport {
        command: "verify".into(),
        scenario: s.to_config_string(),
        flip_lambda: s.flip_lambda,
        artifacts: vec!["residuals.json".into()],
        checks,
        pass,
    };
    write_report(out, &report)?;
    println!("[verify] overall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

/// Applies one sweep value to a scenario copy; the token keeps its exact
/// input spelling for the CSV.
fn apply_sweep_value(s: &mut Scenario, param: SweepParam, token: &str) -> Result<()> {
    let parse_f64 =
        || -> Result<f64> { token.parse().with_context(|| format!("value `{token}`")) };
    let parse_usize =
        || -> Result<usize> { token.parse().with_context(|| format!("value `{token}`")) };
    match param {
        SweepParam::DriveSlope => s.lambda_spec = CoeffSpec::Linear(parse_f64()?),
        SweepParam::Omega0 => match s.omega_spec {
            CoeffSpec::Const(_) => s.omega_spec = CoeffSpec::Const(parse_f64()?),
            CoeffSpec::SinMod { eps, nu, .. } => {
                s.omega_spec = CoeffSpec::SinMod { w0: parse_f64()?, eps, nu }
            }
            _ => bail!("omega0 sweep needs a const or sin_mod frequency"),
        },
        SweepParam::ModeIndex => {
            s.quantum_n = vec![token.parse().with_context(|| format!("value `{token}`"))?]
        }
        SweepParam::TimeStep => {
            let v = parse_f64()?;
            s.dt = v;
            s.dt_fd = v;
        }
        SweepParam::GridPoints => s.grid_n = parse_usize()?,
        SweepParam::FockDim => s.fock_dim = parse_usize()?,
    }
    s.validate().context("sweep value rejected")?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let base = load_scenario(&args.common)?;
    let out = args.common.out.as_path();
    let tokens: Vec<&str> = args.values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if tokens.is_empty() {
        bail!("--values must list at least one value");
    }
    // Validate every point before burning compute on any of them.
    let scenarios: Vec<Scenario> = tokens
        .iter()
        .map(|tok| {
            let mut s = base.clone();
            apply_sweep_value(&mut s, args.param, tok)?;
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let label = args.param.label();
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.common.workers.max(1))
        .build()
        .context("building worker pool")?;
    // Each point gets its own solve-artifact subdirectory plus a check battery;
    // results are collected in input order so output is worker-count independent.
    let results: Vec<(Vec<String>, Vec<ResidualRecord>, Vec<CheckVerdict>)> = pool.install(|| {
        scenarios
            .par_iter()
            .zip(&tokens)
            .map(|(s, tok)| {
                let sub = format!("{label}={tok}");
                let dir = out.join(&sub);
                fs::create_dir_all(&dir)
                    .with_context(|| format!("creating sweep point directory {}", dir.display()))?;
                let files = solve_artifacts(s, &dir)?;
                let (records, verdicts) = run_battery(s)?;
                let files = files.into_iter().map(|f| format!("{sub}/{f}")).collect();
                Ok((files, records, verdicts))
            })
            .collect::<Result<_>>()
    })?;
    println!(
        "[sweep] {} points x {} workers: {:.2?}",
        tokens.len(),
        args.common.workers.max(1),
        clock.elapsed()
    );

    let mut csv = String::from("param,value,check,residual\n");
    let mut checks = Vec::new();
    let mut artifacts = vec!["sweep.csv".to_string()];
    let mut pass = true;
    for (tok, (files, _, verdicts)) in tokens.iter().zip(&results) {
        artifacts.extend(files.iter().cloned());
        for v in verdicts {
            writeln!(csv, "{label},{tok},{},{:.16e}", v.name, v.residual)?;
            pass &= v.pass;
            checks.push(CheckVerdict {
                name: format!("{label}={tok}/{}", v.name),
                residual: v.residual,
                tolerance: v.tolerance,
                pass: v.pass,
            });
        }
    }
    write_atomic(out, "sweep.csv", csv.as_bytes())?;

    let report = RunReport {
        command: "sweep".into(),
        scenario: base.to_config_string(),
        flip_lambda: base.flip_lambda,
        artifacts,
        checks,
        pass,
    };
    write_report(out, &report)?;
    println!("[sweep] overall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
