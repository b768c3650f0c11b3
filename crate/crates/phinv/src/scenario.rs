//! Physical scenarios: parameters, time-dependent coefficient functions ω(t) and
//! λ(t), solver settings, and the plain-text config grammar.
//!
//! Grammar (UTF-8): one `key = value` per line, `#` starts a comment, and commas
//! at top level (outside `()` and `[]`) also separate pairs, so a whole scenario
//! fits on one line. Keys: `m`, `hbar`, `omega`, `lambda`, `t`, `steps`, `n`,
//! `grid_L`, `grid_N`, `fock_dim`, optional auxiliary initial conditions
//! `sigma0`, `sigma_dot0`, `alpha0`, `alpha_dot0`, numerical controls `dt`,
//! `dt_fd`, `k_cutoff`, `edge_band`, and tolerance overrides `tol_*`.
//! Function literals: `const(c)`, `linear(a)` (value `a·t`),
//! `sin_mod(w0, eps, nu)` (value `w0·(1 + eps·sin(νt))`), `table(path.csv)`
//! (two CSV columns `t,value`, linear interpolation).

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Errors from parsing or validating a scenario config.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// Malformed text; reports the 1-based source line.
    #[error("config syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    /// Well-formed text violating a scenario invariant.
    #[error("config validation error: {0}")]
    Validation(String),
    /// A `table(...)` spec whose CSV could not be read or parsed.
    #[error("coefficient table `{path}`: {message}")]
    Table { path: String, message: String },
    /// Evaluation outside the samples of a `table(...)` spec.
    #[error("t = {t} outside table range [{lo}, {hi}]")]
    TableRange { t: f64, lo: f64, hi: f64 },
}

/// A tagged time-dependent coefficient function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoeffSpec {
    /// `const(c)`: the constant `c`.
    Const(f64),
    /// `linear(a)`: the ramp `a·t`.
    Linear(f64),
    /// `sin_mod(w0, eps, nu)`: `w0·(1 + eps·sin(ν t))`.
    SinMod { w0: f64, eps: f64, nu: f64 },
    /// `table(path)`: linear interpolation of `(t, value)` samples loaded from
    /// a two-column CSV. The path string is preserved for round-tripping.
    Table { path: String, samples: Vec<(f64, f64)> },
}

impl CoeffSpec {
    /// Evaluates the coefficient at time `t`.
    ///
    /// Closed-form specs accept any `t`; table specs require `t` within the
    /// sampled range and interpolate linearly between neighbors.
    pub fn eval(&self, t: f64) -> Result<f64, ScenarioError> {
        match self {
            CoeffSpec::Const(c) => Ok(*c),
            CoeffSpec::Linear(a) => Ok(a * t),
            CoeffSpec::SinMod { w0, eps, nu } => Ok(w0 * (1.0 + eps * (nu * t).sin())),
            CoeffSpec::Table { samples, .. } => {
                let (lo, hi) = (samples[0].0, samples[samples.len() - 1].0);
                if t < lo || t > hi {
                    return Err(ScenarioError::TableRange { t, lo, hi });
                }
                // Binary search for the cell containing t, then interpolate.
                let idx = samples.partition_point(|&(tk, _)| tk <= t).min(samples.len() - 1);
                let (t0, v0) = samples[idx - 1];
                let (t1, v1) = samples[idx];
                let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                Ok(v0 + w * (v1 - v0))
            }
        }
    }

    /// Renders the spec back into its config literal.
    fn literal(&self) -> String {
        match self {
            CoeffSpec::Const(c) => format!("const({})", fmt_f64(*c)),
            CoeffSpec::Linear(a) => format!("linear({})", fmt_f64(*a)),
            CoeffSpec::SinMod { w0, eps, nu } => {
                format!("sin_mod({}, {}, {})", fmt_f64(*w0), fmt_f64(*eps), fmt_f64(*nu))
            }
            CoeffSpec::Table { path, .. } => format!("table({path})"),
        }
    }
}

/// Tolerances applied by verification verdicts; every field has a documented
/// default equal to the corresponding acceptance threshold and may be
/// overridden by a `tol_*` config key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Generalized pseudo-Hermiticity residual (`tol_ph_relation`).
    pub ph_relation: f64,
    /// Invariant Liouville-equation residual (`tol_liouville`).
    pub liouville: f64,
    /// Quasi-similarity residual ρ I_PH ρ⁻¹ = I_h (`tol_similarity`).
    pub similarity: f64,
    /// Explicit-form residual for ρ H ρ⁻¹ (`tol_explicit_h`).
    pub explicit_h: f64,
    /// Relative deviation of the interior I_PH spectrum from ħ(n+½)
    /// (`tol_spectrum`).
    pub spectrum: f64,
    /// TDSE residual of the closed-form solutions (`tol_tdse`).
    pub tdse: f64,
    /// L² distance between the propagated and closed-form states
    /// (`tol_propagate`).
    pub propagate: f64,
    /// Relative η-norm drift along a propagated trajectory (`tol_eta_drift`).
    pub eta_drift: f64,
    /// Max |Im| of the phase integrand (`tol_phase_im`).
    pub phase_im: f64,
    /// Overlap-extracted phase vs. quadrature phase, radians
    /// (`tol_overlap_phase`).
    pub overlap_phase: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ph_relation: 1e-5,
            liouville: 1e-5,
            similarity: 1e-6,
            explicit_h: 1e-6,
            spectrum: 1e-5,
            tdse: 1e-4,
            propagate: 1e-4,
            eta_drift: 1e-6,
            phase_im: 1e-6,
            overlap_phase: 1e-4,
        }
    }
}

/// A validated physical scenario plus solver settings.
///
/// Immutable after construction; shared freely across worker threads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Particle mass, > 0.
    pub m: f64,
    /// Reduced Planck constant, > 0 (kept symbolic so tests can vary it).
    pub hbar: f64,
    /// Frequency function ω(t); must be positive at every mesh point.
    pub omega_spec: CoeffSpec,
    /// Coupling function λ(t) of the imaginary linear potential, real-valued.
    pub lambda_spec: CoeffSpec,
    /// Start of the time interval.
    pub t0: f64,
    /// End of the time interval, > `t0`.
    pub t1: f64,
    /// Number of uniform time steps (≥ 2); the mesh has `n_steps + 1` points.
    pub n_steps: usize,
    /// Mode indices n of interest.
    pub quantum_n: Vec<u32>,
    /// Spatial grid half-extent L.
    pub grid_l: f64,
    /// Spatial grid point count N (≥ 128).
    pub grid_n: usize,
    /// Fock truncation dimension D (≥ 16).
    pub fock_dim: usize,
    /// σ(t0); `None` means the documented default (m·ω(t0))^(−1/2).
    pub sigma0: Option<f64>,
    /// σ̇(t0), default 0.
    pub sigma_dot0: f64,
    /// α(t0), default 0.
    pub alpha0: f64,
    /// α̇(t0), default 0. The constant-frequency regression against the
    /// closed form α = −2at/(mω₀²) sets this to −2a/(mω₀²).
    pub alpha_dot0: f64,
    /// Crank-Nicolson time step.
    pub dt: f64,
    /// Centered-difference step for time derivatives in residual checks.
    pub dt_fd: f64,
    /// Spectral cutoff for the η Fourier multiplier.
    pub k_cutoff: f64,
    /// Truncation edge band B; `None` means the default D/8.
    pub edge_band: Option<usize>,
    /// Verification tolerances.
    pub tol: Tolerances,
    /// Debug mutation: negate λ(t) wherever the Hamiltonian is assembled
    /// (and only there — the auxiliary ODEs keep the true λ). Set by the
    /// CLI `--flip-lambda` flag; never serialized into configs.
    #[serde(skip)]
    pub flip_lambda: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            m: 1.0,
            hbar: 1.0,
            omega_spec: CoeffSpec::Const(1.0),
            lambda_spec: CoeffSpec::Const(0.0),
            t0: 0.0,
            t1: 1.0,
            n_steps: 1000,
            quantum_n: vec![0],
            grid_l: 12.0,
            grid_n: 1024,
            fock_dim: 64,
            sigma0: None,
            sigma_dot0: 0.0,
            alpha0: 0.0,
            alpha_dot0: 0.0,
            dt: 2e-4,
            dt_fd: 1e-4,
            k_cutoff: 10.0,
            edge_band: None,
            tol: Tolerances::default(),
            flip_lambda: false,
        }
    }
}

impl Scenario {
    /// Evaluates ω(t). Pure: equal arguments give bit-identical values.
    pub fn eval_omega(&self, t: f64) -> Result<f64, ScenarioError> {
        self.omega_spec.eval(t)
    }

    /// Evaluates λ(t). Pure: equal arguments give bit-identical values.
    pub fn eval_lambda(&self, t: f64) -> Result<f64, ScenarioError> {
        self.lambda_spec.eval(t)
    }

    /// λ(t) as seen by Hamiltonian assembly: negated iff `flip_lambda` is set.
    /// Everything that is *not* an H assembly (the α-ODE, the closed-form
    /// states, the metric) must use [`Scenario::eval_lambda`] instead.
    pub fn hamiltonian_lambda(&self, t: f64) -> Result<f64, ScenarioError> {
        let sign = if self.flip_lambda { -1.0 } else { 1.0 };
        Ok(sign * self.eval_lambda(t)?)
    }

    /// Uniform time mesh `t_k = t0 + k·h`, `k = 0..=n_steps`.
    pub fn mesh(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.n_steps).map(|k| self.t0 + k as f64 * h).collect()
    }

    /// Mesh step `h = (t1 − t0)/n_steps`.
    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }

    /// σ(t0): the configured value, or the default (m·ω(t0))^(−1/2) under
    /// which constant frequency gives the static width 1/(mσ²) = ω₀.
    pub fn sigma0(&self) -> Result<f64, ScenarioError> {
        match self.sigma0 {
            Some(s) => Ok(s),
            None => Ok(1.0 / (self.m * self.eval_omega(self.t0)?).sqrt()),
        }
    }

    /// Truncation edge band: configured value or the default D/8.
    pub fn edge_band(&self) -> usize {
        self.edge_band.unwrap_or(self.fock_dim / 8)
    }

    /// Checks every scenario invariant, naming the first violated one.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Validation(msg));
        if !(self.m > 0.0) {
            return fail(format!("m must be positive (got {})", self.m));
        }
        if !(self.hbar > 0.0) {
            return fail(format!("hbar must be positive (got {})", self.hbar));
        }
        if !(self.t1 > self.t0) {
            return fail(format!("t1 must exceed t0 (got [{}, {}])", self.t0, self.t1));
        }
        if self.n_steps < 2 {
            return fail(format!("steps must be >= 2 (got {})", self.n_steps));
        }
        if self.quantum_n.is_empty() {
            return fail("n must list at least one mode index".into());
        }
        if !(self.grid_l > 0.0) {
            return fail(format!("grid_L must be positive (got {})", self.grid_l));
        }
        if self.grid_n < 128 {
            return fail(format!("grid_N must be >= 128 (got {})", self.grid_n));
        }
        if self.fock_dim < 16 {
            return fail(format!("fock_dim must be >= 16 (got {})", self.fock_dim));
        }
        if let Some(s0) = self.sigma0 {
            if !(s0 > 0.0) {
                return fail(format!("sigma0 must be positive (got {s0})"));
            }
        }
        if !(self.dt > 0.0) || !(self.dt_fd > 0.0) {
            return fail("dt and dt_fd must be positive".into());
        }
        for &t in &self.mesh() {
            let w = self.eval_omega(t)?;
            if !(w > 0.0) {
                return fail(format!("omega must be positive (omega({t}) = {w})"));
            }
            let l = self.eval_lambda(t)?;
            if !l.is_finite() {
                return fail(format!("lambda must be real-valued (lambda({t}) = {l})"));
            }
        }
        Ok(())
    }

    /// Serializes back into the config grammar. `parse_scenario` of the output
    /// reproduces this scenario exactly (round-trip identity).
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m = {}", fmt_f64(self.m));
        let _ = writeln!(s, "hbar = {}", fmt_f64(self.hbar));
        let _ = writeln!(s, "omega = {}", self.omega_spec.literal());
        let _ = writeln!(s, "lambda = {}", self.lambda_spec.literal());
        let _ = writeln!(s, "t = [{}, {}]", fmt_f64(self.t0), fmt_f64(self.t1));
        let _ = writeln!(s, "steps = {}", self.n_steps);
        let ns: Vec<String> = self.quantum_n.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "n = [{}]", ns.join(", "));
        let _ = writeln!(s, "grid_L = {}", fmt_f64(self.grid_l));
        let _ = writeln!(s, "grid_N = {}", self.grid_n);
        let _ = writeln!(s, "fock_dim = {}", self.fock_dim);
        if let Some(s0) = self.sigma0 {
            let _ = writeln!(s, "sigma0 = {}", fmt_f64(s0));
        }
        let _ = writeln!(s, "sigma_dot0 = {}", fmt_f64(self.sigma_dot0));
        let _ = writeln!(s, "alpha0 = {}", fmt_f64(self.alpha0));
        let _ = writeln!(s, "alpha_dot0 = {}", fmt_f64(self.alpha_dot0));
        let _ = writeln!(s, "dt = {}", fmt_f64(self.dt));
        let _ = writeln!(s, "dt_fd = {}", fmt_f64(self.dt_fd));
        let _ = writeln!(s, "k_cutoff = {}", fmt_f64(self.k_cutoff));
        if let Some(b) = self.edge_band {
            let _ = writeln!(s, "edge_band = {b}");
        }
        let d = Tolerances::default();
        let tol_pairs = [
            ("tol_ph_relation", self.tol.ph_relation, d.ph_relation),
            ("tol_liouville", self.tol.liouville, d.liouville),
            ("tol_similarity", self.tol.similarity, d.similarity),
            ("tol_explicit_h", self.tol.explicit_h, d.explicit_h),
            ("tol_spectrum", self.tol.spectrum, d.spectrum),
            ("tol_tdse", self.tol.tdse, d.tdse),
            ("tol_propagate", self.tol.propagate, d.propagate),
            ("tol_eta_drift", self.tol.eta_drift, d.eta_drift),
            ("tol_phase_im", self.tol.phase_im, d.phase_im),
            ("tol_overlap_phase", self.tol.overlap_phase, d.overlap_phase),
        ];
        for (key, value, default) in tol_pairs {
            if value != default {
                let _ = writeln!(s, "{key} = {}", fmt_f64(value));
            }
        }
        s
    }
}

/// Shortest `f64` rendering that round-trips exactly (Rust's `{}` for floats).
fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // Keep a decimal point so the value reads as a float in the config.
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

/// Parses config text into a validated [`Scenario`], resolving `table(...)`
/// paths relative to the current directory.
pub fn parse_scenario(config_text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario_with_base(config_text, Path::new("."))
}

/// Parses config text, resolving relative `table(...)` paths against `base`.
pub fn parse_scenario_with_base(
    config_text: &str,
    base: &Path,
) -> Result<Scenario, ScenarioError> {
    let mut s = Scenario::default();
    for (line_no, key, value) in split_records(config_text)? {
        let syntax = |message: String| ScenarioError::Syntax { line: line_no, message };
        let num = |v: &str| -> Result<f64, ScenarioError> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| syntax(format!("expected a number, got `{}`", v.trim())))
        };
        match key.as_str() {
            "m" => s.m = num(&value)?,
            "hbar" => s.hbar = num(&value)?,
            "omega" => s.omega_spec = parse_coeff(&value, line_no, base)?,
            "lambda" => s.lambda_spec = parse_coeff(&value, line_no, base)?,
            "t" => {
                let items = parse_list(&value, line_no)?;
                if items.len() != 2 {
                    return Err(syntax(format!(
                        "t expects [t0, t1], got {} items",
                        items.len()
                    )));
                }
                s.t0 = num(&items[0])?;
                s.t1 = num(&items[1])?;
            }
            "steps" => {
                s.n_steps = value
                    .trim()
                    .parse()
                    .map_err(|_| syntax(format!("steps expects an integer, got `{value}`")))?;
            }
            "n" => {
                let items = parse_list(&value, line_no)?;
                s.quantum_n = items
                    .iter()
                    .map(|v| {
                        v.trim().parse::<u32>().map_err(|_| {
                            syntax(format!("n expects non-negative integers, got `{v}`"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
            "grid_L" => s.grid_l = num(&value)?,
            "grid_N" => {
                s.grid_n = value
                    .trim()
                    .parse()
                    .map_err(|_| syntax(format!("grid_N expects an integer, got `{value}`")))?;
            }
            "fock_dim" => {
                s.fock_dim = value
                    .trim()
                    .parse()
                    .map_err(|_| syntax(format!("fock_dim expects an integer, got `{value}`")))?;
            }
            "sigma0" => s.sigma0 = Some(num(&value)?),
            "sigma_dot0" => s.sigma_dot0 = num(&value)?,
            "alpha0" => s.alpha0 = num(&value)?,
            "alpha_dot0" => s.alpha_dot0 = num(&value)?,
            "dt" => s.dt = num(&value)?,
            "dt_fd" => s.dt_fd = num(&value)?,
            "k_cutoff" => s.k_cutoff = num(&value)?,
            "edge_band" => {
                s.edge_band = Some(value.trim().parse().map_err(|_| {
                    syntax(format!("edge_band expects an integer, got `{value}`"))
                })?);
            }
            "tol_ph_relation" => s.tol.ph_relation = num(&value)?,
            "tol_liouville" => s.tol.liouville = num(&value)?,
            "tol_similarity" => s.tol.similarity = num(&value)?,
            "tol_explicit_h" => s.tol.explicit_h = num(&value)?,
            "tol_spectrum" => s.tol.spectrum = num(&value)?,
            "tol_tdse" => s.tol.tdse = num(&value)?,
            "tol_propagate" => s.tol.propagate = num(&value)?,
            "tol_eta_drift" => s.tol.eta_drift = num(&value)?,
            "tol_phase_im" => s.tol.phase_im = num(&value)?,
            "tol_overlap_phase" => s.tol.overlap_phase = num(&value)?,
            other => {
                return Err(syntax(format!("unknown key `{other}`")));
            }
        }
    }
    s.validate()?;
    Ok(s)
}

/// Splits config text into `(line, key, value)` records: newline-separated,
/// with top-level commas (outside brackets/parens) as additional separators.
fn split_records(text: &str) -> Result<Vec<(usize, String, String)>, ScenarioError> {
    let mut records = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let mut depth = 0i32;
        let mut current = String::new();
        let mut pieces = Vec::new();
        for ch in line.chars() {
            match ch {
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                ',' if depth == 0 => {
                    pieces.push(std::mem::take(&mut current));
                    continue;
                }
                _ => {}
            }
            if depth < 0 {
                return Err(ScenarioError::Syntax {
                    line: line_no,
                    message: "unbalanced closing bracket".into(),
                });
            }
            current.push(ch);
        }
        if depth != 0 {
            return Err(ScenarioError::Syntax {
                line: line_no,
                message: "unbalanced opening bracket".into(),
            });
        }
        pieces.push(current);
        for piece in pieces {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let Some(eq) = piece.find('=') else {
                return Err(ScenarioError::Syntax {
                    line: line_no,
                    message: format!("expected `key = value`, got `{piece}`"),
                });
            };
            let key = piece[..eq].trim().to_string();
            let value = piece[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(ScenarioError::Syntax {
                    line: line_no,
                    message: format!("missing key before `=` in `{piece}`"),
                });
            }
            records.push((line_no, key, value));
        }
    }
    Ok(records)
}

/// Parses a bracketed comma-separated list `[a, b, ...]` into raw items.
fn parse_list(value: &str, line: usize) -> Result<Vec<String>, ScenarioError> {
    let v = value.trim();
    if !v.starts_with('[') || !v.ends_with(']') {
        return Err(ScenarioError::Syntax {
            line,
            message: format!("expected a bracketed list, got `{v}`"),
        });
    }
    Ok(v[1..v.len() - 1]
        .split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect())
}

/// Parses a coefficient-function literal.
fn parse_coeff(value: &str, line: usize, base: &Path) -> Result<CoeffSpec, ScenarioError> {
    let v = value.trim();
    let syntax = |message: String| ScenarioError::Syntax { line, message };
    let (name, args) = match (v.find('('), v.ends_with(')')) {
        (Some(open), true) => (v[..open].trim(), v[open + 1..v.len() - 1].trim()),
        _ => {
            return Err(syntax(format!(
                "expected a function literal like const(1.0), got `{v}`"
            )))
        }
    };
    let nums = |expected: usize| -> Result<Vec<f64>, ScenarioError> {
        let parts: Vec<&str> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::trim).collect()
        };
        if parts.len() != expected {
            return Err(syntax(format!(
                "{name}() expects {expected} argument(s), got {}",
                parts.len()
            )));
        }
        parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| syntax(format!("expected a number, got `{p}`")))
            })
            .collect()
    };
    match name {
        "const" => Ok(CoeffSpec::Const(nums(1)?[0])),
        "linear" => Ok(CoeffSpec::Linear(nums(1)?[0])),
        "sin_mod" => {
            let a = nums(3)?;
            Ok(CoeffSpec::SinMod { w0: a[0], eps: a[1], nu: a[2] })
        }
        "table" => load_table(args, base),
        other => Err(syntax(format!("unknown function literal `{other}`"))),
    }
}

/// Loads a two-column `t,value` CSV for a `table(...)` spec.
fn load_table(path_str: &str, base: &Path) -> Result<CoeffSpec, ScenarioError> {
    let path = {
        let p = Path::new(path_str);
        if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
    };
    let table_err = |message: String| ScenarioError::Table {
        path: path_str.to_string(),
        message,
    };
    let text = std::fs::read_to_string(&path).map_err(|e| table_err(e.to_string()))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // Tolerate a `t,value` header row.
        if idx == 0 && line.split(',').any(|f| f.trim().parse::<f64>().is_err()) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(table_err(format!(
                "line {}: expected two columns t,value",
                idx + 1
            )));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| table_err(format!("line {}: bad t `{}`", idx + 1, fields[0])))?;
        let v: f64 = fields[1]
            .parse()
            .map_err(|_| table_err(format!("line {}: bad value `{}`", idx + 1, fields[1])))?;
        samples.push((t, v));
    }
    if samples.len() < 2 {
        return Err(table_err("need at least two samples".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(table_err("t column must be strictly increasing".into()));
    }
    Ok(CoeffSpec::Table { path: path_str.to_string(), samples })
}
