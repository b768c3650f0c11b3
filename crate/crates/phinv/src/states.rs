//! Physical objects of the construction: eigenfunctions of the pseudo-Hermitian
//! invariant, the real cumulative phases, the full Schrödinger solutions
//! Φₙ(x,t) = e^{iεₙ(t)}·φₙ(x,t), η-inner products, and the η-expectation value
//! of the Hamiltonian.
//!
//! The key closed form: with ρ⁻¹ = exp[(αp − mα̇x)/2ħ] acting on the oscillator
//! invariant's eigenfunction ψₙ, BCH splitting (the commutator is a c-number)
//! gives
//!
//! φₙ(x,t) = exp[i·mαα̇/(8ħ)] · exp[−mα̇x/(2ħ)] · ψₙ(x − iα/2, t),
//!
//! which is exact on the grid because ψₙ is entire in x. η-inner products are
//! evaluated through the similarity route ⟨φₘ|η|φₙ⟩ = ⟨ψₘ|ψₙ⟩ (exact by
//! construction) rather than by applying the unbounded Fourier multiplier of η;
//! a direct grid η exists only in the dynamics oracle, under a spectral cutoff.

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::auxsolve::{AuxError, AuxPoint, AuxTrace};
use crate::oracle::Grid;
use crate::scenario::{Scenario, ScenarioError};
use crate::specfun::{eigenfunction_ih, SpecFunError};
use crate::{fourier, I};

/// Builder-enforced bound on wavefunction magnitude at the grid endpoints.
pub const EDGE_DECAY_BOUND: f64 = 1e-10;

/// Errors from state construction and phase evaluation.
#[derive(Debug, Error)]
pub enum StatesError {
    /// The grid is too small for the current state: endpoint amplitude above
    /// the documented decay bound.
    #[error("edge decay violated at t = {t}: |psi(edge)| = {edge_abs:.3e} >= {EDGE_DECAY_BOUND:.0e} (grid too small for current alpha)")]
    EdgeDecay { t: f64, edge_abs: f64 },
    /// Mesh index outside the auxiliary trace.
    #[error("mesh index {index} out of range (mesh has {len} nodes)")]
    IndexOutOfRange { index: usize, len: usize },
    /// Dense phase evaluation outside the covered interval.
    #[error("t = {t} outside the phase mesh by more than one cell")]
    PhaseOutOfRange { t: f64 },
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Mode tag of a wavefunction sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// A single invariant eigenstate with index n.
    Single(u32),
    /// A linear combination of eigenstates (e.g. a propagated state).
    Superposition,
}

/// A complex wavefunction sampled on a uniform spatial grid at one time.
/// Builders enforce the endpoint decay bound [`EDGE_DECAY_BOUND`]; the grid
/// has at least 128 points (checked by [`Grid::new`]).
#[derive(Debug, Clone)]
pub struct WaveSample {
    /// The spatial grid, shared metadata.
    pub grid: Grid,
    /// Complex amplitude per grid point.
    pub values: Vec<Complex64>,
    /// Time stamp.
    pub t: f64,
    /// Mode index or superposition tag.
    pub mode: Mode,
}

impl WaveSample {
    /// Wraps sampled values, enforcing the endpoint decay invariant.
    pub fn new(
        grid: Grid,
        values: Vec<Complex64>,
        t: f64,
        mode: Mode,
    ) -> Result<WaveSample, StatesError> {
        assert_eq!(values.len(), grid.n, "value count must match the grid");
        let edge_abs = values[0].norm().max(values[values.len() - 1].norm());
        if edge_abs >= EDGE_DECAY_BOUND {
            return Err(StatesError::EdgeDecay { t, edge_abs });
        }
        Ok(WaveSample { grid, values, t, mode })
    }

    /// L² norm by trapezoidal quadrature.
    pub fn l2_norm(&self) -> f64 {
        trapezoid_abs2(&self.values, self.grid.dx()).sqrt()
    }

    /// L² distance to another sample on the same grid.
    pub fn l2_distance(&self, other: &WaveSample) -> f64 {
        assert_eq!(self.grid.n, other.grid.n, "samples must share a grid");
        let diff: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        trapezoid_abs2(&diff, self.grid.dx()).sqrt()
    }

    /// Writes the sample as CSV with header `x,re,im,abs2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re,im,abs2")?;
        for (x, v) in self.grid.xs().iter().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", x, v.re, v.im, v.norm_sqr())?;
        }
        Ok(())
    }
}

/// Trapezoidal quadrature of |f|² on a uniform grid.
fn trapezoid_abs2(values: &[Complex64], dx: f64) -> f64 {
    let sum: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    let ends = 0.5 * (values[0].norm_sqr() + values[values.len() - 1].norm_sqr());
    (sum - ends) * dx
}

/// Trapezoidal quadrature of conj(f)·g on a uniform grid.
pub(crate) fn trapezoid_inner(f: &[Complex64], g: &[Complex64], dx: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for (a, b) in f.iter().zip(g) {
        sum += a.conj() * b;
    }
    let ends = 0.5 * (f[0].conj() * g[0] + f[f.len() - 1].conj() * g[g.len() - 1]);
    (sum - ends) * dx
}

/// Cumulative real phase εₙ(t) on the time mesh, split into its two
/// contributions: the invariant part −(n+½)∫dt′/(mσ²) and the metric
/// correction +∫λα/(4ħ)dt′. All entries are real by construction; where the
/// imaginary content of the underlying integrand is actually measured, see
/// [`check_phase_reality`].
#[derive(Debug, Clone)]
pub struct PhaseTrace {
    /// Time mesh (shared with the auxiliary solver).
    pub mesh: Vec<f64>,
    /// Cumulative phase, radians; eps[0] = 0.
    pub eps: Vec<f64>,
    /// Invariant contribution −(n+½)∫dt′/(mσ²).
    pub part_invariant: Vec<f64>,
    /// Metric contribution +∫λα/(4ħ)dt′.
    pub part_metric: Vec<f64>,
    /// dε/dt at the nodes (exact integrand values), for dense evaluation.
    eps_dot: Vec<f64>,
    /// Mesh step.
    h: f64,
}

impl PhaseTrace {
    /// Dense phase by cubic Hermite interpolation (exact node derivatives);
    /// admits up to one mesh cell beyond either end.
    pub fn eval(&self, t: f64) -> Result<f64, StatesError> {
        let (t0, t1) = (self.mesh[0], self.mesh[self.mesh.len() - 1]);
        if t < t0 - self.h || t > t1 + self.h {
            return Err(StatesError::PhaseOutOfRange { t });
        }
        let cells = self.mesh.len() - 1;
        let k = (((t - t0) / self.h).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let u = (t - self.mesh[k]) / self.h;
        let (u2, u3) = (u * u, u * u * u);
        Ok((2.0 * u3 - 3.0 * u2 + 1.0) * self.eps[k]
            + (u3 - 2.0 * u2 + u) * self.h * self.eps_dot[k]
            + (-2.0 * u3 + 3.0 * u2) * self.eps[k + 1]
            + (u3 - u2) * self.h * self.eps_dot[k + 1])
    }

    /// Writes the trace as CSV with header `t,eps,part_invariant,part_metric`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,eps,part_invariant,part_metric")?;
        for k in 0..self.mesh.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.mesh[k], self.eps[k], self.part_invariant[k], self.part_metric[k]
            )?;
        }
        Ok(())
    }
}

/// Phase integrand dε/dt = −(n+½)/(mσ²) + λα/(4ħ) at one time.
fn phase_rate(n: u32, s: &Scenario, at: &AuxPoint, t: f64) -> Result<f64, StatesError> {
    let l = s.eval_lambda(t)?;
    Ok(-(n as f64 + 0.5) / (s.m * at.sigma * at.sigma) + l * at.alpha / (4.0 * s.hbar))
}

/// Cumulative trapezoidal quadrature of the phase integrand on the shared
/// mesh, parts stored separately. eps = part_invariant + part_metric holds
/// pointwise by construction.
pub fn phase(n: u32, s: &Scenario, aux: &AuxTrace) -> Result<PhaseTrace, StatesError> {
    let mesh = aux.mesh.clone();
    let h = mesh[1] - mesh[0];
    let len = mesh.len();
    let mut f_inv = Vec::with_capacity(len);
    let mut f_met = Vec::with_capacity(len);
    for (k, &t) in mesh.iter().enumerate() {
        let at = aux.at_index(k);
        f_inv.push(-(n as f64 + 0.5) / (s.m * at.sigma * at.sigma));
        f_met.push(s.eval_lambda(t)? * at.alpha / (4.0 * s.hbar));
    }
    let mut part_invariant = vec![0.0; len];
    let mut part_metric = vec![0.0; len];
    let mut eps = vec![0.0; len];
    for k in 1..len {
        part_invariant[k] = part_invariant[k - 1] + 0.5 * h * (f_inv[k - 1] + f_inv[k]);
        part_metric[k] = part_metric[k - 1] + 0.5 * h * (f_met[k - 1] + f_met[k]);
        eps[k] = part_invariant[k] + part_metric[k];
    }
    let eps_dot = f_inv.iter().zip(&f_met).map(|(a, b)| a + b).collect();
    Ok(PhaseTrace { mesh, eps, part_invariant, part_metric, eps_dot, h })
}

/// Samples the oscillator-invariant eigenfunction ψₙ on the (real) grid.
fn psi_on_grid(
    n: u32,
    s: &Scenario,
    at: &AuxPoint,
    grid: &Grid,
) -> Result<Vec<Complex64>, StatesError> {
    grid.xs()
        .iter()
        .map(|&x| {
            Ok(eigenfunction_ih(
                n,
                Complex64::new(x, 0.0),
                at.sigma,
                at.sigma_dot,
                s.m,
                s.hbar,
            )?)
        })
        .collect()
}

/// Samples φₙ (the pseudo-Hermitian invariant eigenfunction, no ε-phase) on
/// the grid at the given auxiliary point. Exact closed form:
/// exp[imαα̇/(8ħ)]·exp[−mα̇x/(2ħ)]·ψₙ(x − iα/2).
pub fn phi_ph_at(
    n: u32,
    s: &Scenario,
    at: &AuxPoint,
    t: f64,
    grid: &Grid,
) -> Result<WaveSample, StatesError> {
    let scalar = (I * (s.m * at.alpha * at.alpha_dot / (8.0 * s.hbar))).exp();
    let values: Vec<Complex64> = grid
        .xs()
        .iter()
        .map(|&x| {
            let z = Complex64::new(x, -0.5 * at.alpha);
            let weight = (-s.m * at.alpha_dot * x / (2.0 * s.hbar)).exp();
            Ok(scalar * weight * eigenfunction_ih(n, z, at.sigma, at.sigma_dot, s.m, s.hbar)?)
        })
        .collect::<Result<_, StatesError>>()?;
    WaveSample::new(grid.clone(), values, t, Mode::Single(n))
}

/// φₙ at mesh node `t_index` of the auxiliary trace.
pub fn phi_ph(
    n: u32,
    s: &Scenario,
    aux: &AuxTrace,
    t_index: usize,
    grid: &Grid,
) -> Result<WaveSample, StatesError> {
    if t_index >= aux.mesh.len() {
        return Err(StatesError::IndexOutOfRange { index: t_index, len: aux.mesh.len() });
    }
    phi_ph_at(n, s, &aux.at_index(t_index), aux.mesh[t_index], grid)
}

/// Full solution Φₙ = e^{iεₙ}·φₙ at an arbitrary time, with the phase trace
/// supplied by the caller (so sweeps don't recompute the quadrature).
pub fn solution_phi_at(
    n: u32,
    s: &Scenario,
    aux: &AuxTrace,
    ph: &PhaseTrace,
    t: f64,
    grid: &Grid,
) -> Result<WaveSample, StatesError> {
    let at = aux.eval(t)?;
    let mut sample = phi_ph_at(n, s, &at, t, grid)?;
    let factor = (I * ph.eval(t)?).exp();
    for v in &mut sample.values {
        *v *= factor;
    }
    Ok(sample)
}

/// Full solution Φₙ at mesh node `t_index`. |Φₙ| = |φₙ| pointwise (the phase
/// factor is unimodular).
pub fn solution_phi(
    n: u32,
    s: &Scenario,
    aux: &AuxTrace,
    t_index: usize,
    grid: &Grid,
) -> Result<WaveSample, StatesError> {
    let ph = phase(n, s, aux)?;
    solution_phi_at(n, s, aux, &ph, aux.mesh[t_index], grid)
}

/// η-inner product ⟨φₘ|η|φₙ⟩ evaluated through the similarity route
/// ⟨ψₘ|ψₙ⟩ (exact because ρφ = ψ by construction), by grid quadrature on the
/// scenario's grid. Equals δₘₙ for exact auxiliary data.
pub fn eta_inner(
    m_idx: u32,
    n_idx: u32,
    s: &Scenario,
    aux: &AuxTrace,
    t_index: usize,
) -> Result<Complex64, StatesError> {
    if t_index >= aux.mesh.len() {
        return Err(StatesError::IndexOutOfRange { index: t_index, len: aux.mesh.len() });
    }
    let grid = Grid::new(s.grid_l, s.grid_n);
    let at = aux.at_index(t_index);
    let psi_m = psi_on_grid(m_idx, s, &at, &grid)?;
    let psi_n = psi_on_grid(n_idx, s, &at, &grid)?;
    Ok(trapezoid_inner(&psi_m, &psi_n, grid.dx()))
}

/// The two values returned by [`mean_h_eta`]: the primary quadrature result
/// and the secondary closed-form formula value (with the mσ̇² coefficient).
#[derive(Debug, Clone, Copy)]
pub struct MeanEnergy {
    /// ⟨ψₙ|ρHρ⁻¹|ψₙ⟩ by grid quadrature with the explicit conjugated form.
    pub quadrature: f64,
    /// Closed form (ħ/2)(n+½)(mσ̇² + mω²σ² + 1/(mσ²)) − (mα̇²/8 + mω²α²/8 + αλ/2).
    pub closed_form: f64,
}

/// η-expectation value of H in the n-th solution, ⟨Φₙ|η H|Φₙ⟩ = ⟨ψₙ|ρHρ⁻¹|ψₙ⟩.
///
/// The quadrature applies the explicit conjugated Hamiltonian
/// ρHρ⁻¹ = p²/2m + ½mω²x² + i(λ + mαω²/2)x + i(α̇/2)p − (mα̇²/8 + mω²α²/8 + αλ/2)
/// with a spectral kinetic term; the imaginary linear terms contribute zero by
/// parity of |ψₙ|², and the real part is returned as the primary value.
pub fn mean_h_eta(
    n: u32,
    s: &Scenario,
    aux: &AuxTrace,
    t_index: usize,
) -> Result<MeanEnergy, StatesError> {
    if t_index >= aux.mesh.len() {
        return Err(StatesError::IndexOutOfRange { index: t_index, len: aux.mesh.len() });
    }
    let grid = Grid::new(s.grid_l, s.grid_n);
    let t = aux.mesh[t_index];
    let at = aux.at_index(t_index);
    let w = s.eval_omega(t)?;
    let l = s.eval_lambda(t)?;
    let psi = psi_on_grid(n, s, &at, &grid)?;
    let dx = grid.dx();
    let xs = grid.xs();

    // Spectral p²ψ and pψ: p = −iħ∂ₓ is the multiplier ħk.
    let p2_psi = fourier::apply_multiplier(&psi, dx, |k| {
        Complex64::new(s.hbar * s.hbar * k * k, 0.0)
    });
    let p_psi = fourier::apply_multiplier(&psi, dx, |k| Complex64::new(s.hbar * k, 0.0));

    let scalar = s.m * at.alpha_dot * at.alpha_dot / 8.0
        + s.m * w * w * at.alpha * at.alpha / 8.0
        + at.alpha * l / 2.0;
    let mut h_psi = Vec::with_capacity(psi.len());
    for (j, &x) in xs.iter().enumerate() {
        let potential = Complex64::new(0.5 * s.m * w * w * x * x - scalar, 0.0)
            + I * ((l + 0.5 * s.m * at.alpha * w * w) * x);
        h_psi.push(
            p2_psi[j] / (2.0 * s.m) + potential * psi[j] + I * (0.5 * at.alpha_dot) * p_psi[j],
        );
    }
    let quadrature = trapezoid_inner(&psi, &h_psi, dx).re;

    let (sig, sd) = (at.sigma, at.sigma_dot);
    let closed_form = 0.5
        * s.hbar
        * (n as f64 + 0.5)
        * (s.m * sd * sd + s.m * w * w * sig * sig + 1.0 / (s.m * sig * sig))
        - scalar;
    Ok(MeanEnergy { quadrature, closed_form })
}

/// Result of [`check_phase_reality`].
#[derive(Debug, Clone, Copy)]
pub struct PhaseRealityReport {
    /// max |Im integrand| over interior mesh times — the reality measure.
    pub max_imag: f64,
    /// max |Re integrand − dε/dt| against the closed-form phase rate.
    pub max_re_deviation: f64,
}

/// Evaluates the phase integrand (1/ħ)⟨φₙ|η[iħ∂ₜ − H]|φₙ⟩ numerically at
/// interior mesh times, through the similarity route
/// i⟨ψₙ|∂ₜψₙ⟩ − ⟨ψₙ|h|ψₙ⟩/ħ (with h = p²/2m + ½mω²x² − αλ/4), using centered
/// time differences of the sampled eigenfunctions with the mesh step.
///
/// The integrand should be purely real and equal dε/dt = −(n+½)/(mσ²) + λα/(4ħ);
/// the report carries the worst deviation of both properties.
pub fn check_phase_reality(
    n: u32,
    s: &Scenario,
    aux: &AuxTrace,
) -> Result<PhaseRealityReport, StatesError> {
    let grid = Grid::new(s.grid_l, s.grid_n);
    let h = aux.mesh[1] - aux.mesh[0];
    let dx = grid.dx();
    let xs = grid.xs();
    let mut max_imag: f64 = 0.0;
    let mut max_re_dev: f64 = 0.0;
    // Every interior node would be O(mesh × N log N); every 10th past the
    // endpoints samples the same dynamics at a tenth the cost.
    let stride = ((aux.mesh.len() - 2) / 100).max(1);
    for k in (1..aux.mesh.len() - 1).step_by(stride) {
        let t = aux.mesh[k];
        let at = aux.at_index(k);
        let psi_c = psi_on_grid(n, s, &at, &grid)?;
        let psi_p = psi_on_grid(n, s, &aux.eval(t + h)?, &grid)?;
        let psi_m = psi_on_grid(n, s, &aux.eval(t - h)?, &grid)?;
        let dpsi_dt: Vec<Complex64> = psi_p
            .iter()
            .zip(&psi_m)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let w = s.eval_omega(t)?;
        let l = s.eval_lambda(t)?;
        let p2_psi = fourier::apply_multiplier(&psi_c, dx, |k| {
            Complex64::new(s.hbar * s.hbar * k * k, 0.0)
        });
        let h_psi: Vec<Complex64> = psi_c
            .iter()
            .zip(&p2_psi)
            .zip(&xs)
            .map(|((psi, p2), &x)| {
                p2 / (2.0 * s.m)
                    + Complex64::new(0.5 * s.m * w * w * x * x - 0.25 * at.alpha * l, 0.0) * psi
            })
            .collect();
        let integrand = I * trapezoid_inner(&psi_c, &dpsi_dt, dx)
            - trapezoid_inner(&psi_c, &h_psi, dx) / s.hbar;
        let expected = phase_rate(n, s, &at, t)?;
        max_imag = max_imag.max(integrand.im.abs());
        max_re_dev = max_re_dev.max((integrand.re - expected).abs());
    }
    Ok(PhaseRealityReport { max_imag, max_re_deviation: max_re_dev })
}
