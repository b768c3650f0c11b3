//! Independent dynamics oracle: a Crank–Nicolson grid propagator for the
//! non-Hermitian Schrödinger equation iħ∂ₜψ = [p²/2m + ½mω²(t)x² + iλ(t)x]ψ,
//! plus grid-level diagnostics (TDSE residual of closed-form solutions,
//! η-norms under a spectral cutoff, overlap-phase extraction).
//!
//! Nothing here reuses the invariant-method code paths: the propagator sees
//! only the Hamiltonian coefficients, so agreement with the closed-form
//! solutions is evidence, not circularity. The metric operator
//! η = exp[(mα̇x − αp)/ħ] appears on the grid only in [`apply_eta`], as the
//! split form (scalar BCH factor) · e^{(mα̇/ħ)x} · Fourier-multiplier e^{−αk}
//! restricted to |k| ≤ k_cutoff; everywhere else η-inner products go through
//! the similarity route in the states module.

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::auxsolve::{AuxError, AuxPoint, AuxTrace};
use crate::fourier;
use crate::scenario::{Scenario, ScenarioError};
use crate::states::{trapezoid_inner, StatesError, WaveSample};
use crate::I;

/// Relative edge-amplitude bound enforced during propagation. A state whose
/// wall amplitude exceeds this fraction of its peak has reached the boundary
/// and the run is aborted rather than silently reflected.
pub const EDGE_GUARD_REL: f64 = 1e-8;

/// Band-limit precondition for η application: spectral content beyond the
/// cutoff must stay below this fraction of the spectral peak.
pub const BAND_LIMIT_REL: f64 = 1e-12;

/// Errors from grid propagation and η evaluation.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The propagated state reached the grid wall.
    #[error("state reached the grid wall at t = {t}: edge/peak amplitude ratio {rel:.3e} > {EDGE_GUARD_REL:.0e}")]
    EdgeLeak { t: f64, rel: f64 },
    /// Non-finite amplitudes appeared during propagation.
    #[error("non-finite amplitude during propagation at t = {t}")]
    NonFinite { t: f64 },
    /// Spectral content beyond the cutoff: the multiplier e^{−αk} would
    /// amplify truncation noise, so η application refuses.
    #[error("band limit violated: spectral content beyond the cutoff is {frac:.3e} of peak (bound {BAND_LIMIT_REL:.0e})")]
    CutoffViolation { frac: f64 },
    /// Degenerate time interval or step.
    #[error("invalid propagation interval: t0 = {t0}, t1 = {t1}, dt = {dt}")]
    BadInterval { t0: f64, t1: f64, dt: f64 },
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    States(#[from] StatesError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Uniform symmetric spatial grid on [−L, L] with both endpoints included,
/// dx = 2L/(N−1).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Half-extent, position units.
    pub l: f64,
    /// Number of points; at least 128 (acceptance runs use ≥ 256).
    pub n: usize,
}

impl Grid {
    /// Creates a grid; panics on nonpositive extent or fewer than 128 points
    /// (programmer contract, not a runtime condition).
    pub fn new(l: f64, n: usize) -> Grid {
        assert!(l > 0.0, "grid half-extent must be positive");
        assert!(n >= 128, "grid must have at least 128 points, got {n}");
        Grid { l, n }
    }

    /// Grid spacing 2L/(N−1).
    pub fn dx(&self) -> f64 {
        2.0 * self.l / (self.n as f64 - 1.0)
    }

    /// Grid points −L + j·dx, j = 0..N−1.
    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| -self.l + j as f64 * dx).collect()
    }
}

/// Result of an η-inner-product evaluation on the grid: the value is the real
/// part; the imaginary part (zero in exact arithmetic for ⟨ψ|ηψ⟩ since η is
/// Hermitian) is kept as a numerical diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct EtaNorm {
    /// Re ⟨ψ|ηψ⟩.
    pub value: f64,
    /// Im ⟨ψ|ηψ⟩ — cutoff/quadrature noise indicator.
    pub imag: f64,
}

/// A propagated trajectory: saved states with their plain L² norms and
/// η-norms. Append-only during a run; immutable afterwards.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Save times, strictly increasing; first entry is t0, last is t1.
    pub times: Vec<f64>,
    /// Saved states; all share one grid.
    pub states: Vec<WaveSample>,
    /// Standard L² norm per saved time.
    pub plain_norm: Vec<f64>,
    /// η-inner product of the state with itself per saved time (real part).
    pub eta_norm: Vec<f64>,
}

impl Trajectory {
    /// Writes the norm columns as CSV with header `t,plain_norm,eta_norm`.
    pub fn write_norms_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,plain_norm,eta_norm")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.times[k], self.plain_norm[k], self.eta_norm[k]
            )?;
        }
        Ok(())
    }
}

/// Solves the tridiagonal system with constant off-diagonals
/// off·x_{j−1} + diag_j·x_j + off·x_{j+1} = rhs_j by the Thomas algorithm.
/// The Crank–Nicolson matrices here are strongly diagonally dominant
/// (|diag| ≈ 1, |off| ≪ ½), so no pivoting is needed.
fn thomas(diag: &[Complex64], off: Complex64, rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    rhs[0] /= denom;
    for j in 1..n {
        scratch[j] = off / denom;
        denom = diag[j] - off * scratch[j];
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= scratch[j + 1] * next;
    }
}

/// Propagates `psi0` from t0 to t1 with the Crank–Nicolson scheme
///
/// (1 + i·dt·H(t_mid)/2ħ)ψ_{k+1} = (1 − i·dt·H(t_mid)/2ħ)ψ_k,
///
/// H discretized as a tridiagonal matrix: second-order central Laplacian for
/// p²/2m, diagonal potential ½mω²x² + iλx, Dirichlet walls. The step is
/// adjusted to divide (t1 − t0) exactly; every `save_every`-th state plus the
/// endpoints are recorded with plain and η norms (η uses the scenario's
/// spectral cutoff). Unconditionally stable in the Hermitian part and
/// second-order in dt; the anti-Hermitian part iλx is linear and bounded on
/// the grid.
pub fn propagate(
    psi0: &WaveSample,
    s: &Scenario,
    t0: f64,
    t1: f64,
    dt: f64,
    save_every: usize,
) -> Result<Trajectory, OracleError> {
    if !(t1 > t0) || !(dt > 0.0) {
        return Err(OracleError::BadInterval { t0, t1, dt });
    }
    let aux = AuxTrace::solve(s)?;
    let n_steps = (((t1 - t0) / dt).round() as usize).max(1);
    let dt_eff = (t1 - t0) / n_steps as f64;
    let save_every = save_every.max(1);

    let grid = psi0.grid.clone();
    let n = grid.n;
    let dx = grid.dx();
    let xs = grid.xs();
    let kin = s.hbar * s.hbar / (2.0 * s.m * dx * dx);

    let mut psi = psi0.values.clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        plain_norm: Vec::new(),
        eta_norm: Vec::new(),
    };
    let record = |t: f64, values: &[Complex64], traj: &mut Trajectory| -> Result<(), OracleError> {
        let sample = WaveSample::new(grid.clone(), values.to_vec(), t, psi0.mode)?;
        let norm = trapezoid_inner(values, values, dx).re.sqrt();
        let eta = eta_norm(&sample, s, &aux, t, s.k_cutoff)?;
        traj.times.push(t);
        traj.states.push(sample);
        traj.plain_norm.push(norm);
        traj.eta_norm.push(eta.value);
        Ok(())
    };
    record(t0, &psi, &mut traj)?;

    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n_steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt_eff;
        let w = s.eval_omega(t_mid)?;
        let lam = s.hamiltonian_lambda(t_mid)?;
        let coef = I * dt_eff / (2.0 * s.hbar);
        let off = -coef * kin;
        for j in 0..n {
            let v = Complex64::new(0.5 * s.m * w * w * xs[j] * xs[j], lam * xs[j]);
            let h_diag = 2.0 * kin + v;
            diag[j] = 1.0 + coef * h_diag;
            // (1 − i·dt·H/2ħ)ψ with Dirichlet ghost points beyond the walls.
            let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { psi[j + 1] } else { Complex64::new(0.0, 0.0) };
            rhs[j] = psi[j] - coef * (-kin * (left + right) + h_diag * psi[j]);
        }
        thomas(&diag, off, &mut rhs);
        std::mem::swap(&mut psi, &mut rhs);

        let t_next = t0 + (k + 1) as f64 * dt_eff;
        let mut peak: f64 = 0.0;
        for v in &psi {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(OracleError::NonFinite { t: t_next });
            }
            peak = peak.max(v.norm());
        }
        let edge = psi[0].norm().max(psi[n - 1].norm());
        if edge > EDGE_GUARD_REL * peak {
            return Err(OracleError::EdgeLeak { t: t_next, rel: edge / peak });
        }
        if (k + 1) % save_every == 0 || k + 1 == n_steps {
            record(t_next, &psi, &mut traj)?;
        }
    }
    Ok(traj)
}

/// L² norm over the grid interior (Dirichlet walls excluded).
fn interior_norm(values: &[Complex64], dx: f64) -> f64 {
    let sum: f64 = values[1..values.len() - 1]
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    (sum * dx).sqrt()
}

/// Measures how well a closed-form family t ↦ Φ(t) satisfies the
/// time-dependent Schrödinger equation:
///
/// ‖iħ(Φ(t+dt_fd) − Φ(t−dt_fd))/(2dt_fd) − H(t)Φ(t)‖ / ‖Φ(t)‖
///
/// over the grid interior. The kinetic term of H is applied spectrally so the
/// residual measures the closed form itself rather than the O(dx²) truncation
/// of the finite-difference Laplacian (which would dominate at every
/// resolution of interest); the potential ½mω²x² + iλx is diagonal, exactly
/// as in [`propagate`].
pub fn tdse_residual<F>(
    phi_builder: F,
    s: &Scenario,
    t: f64,
    dt_fd: f64,
) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<WaveSample, StatesError>,
{
    let center = phi_builder(t)?;
    let plus = phi_builder(t + dt_fd)?;
    let minus = phi_builder(t - dt_fd)?;
    let grid = &center.grid;
    let dx = grid.dx();
    let xs = grid.xs();
    let w = s.eval_omega(t)?;
    let lam = s.hamiltonian_lambda(t)?;
    let p2_phi = fourier::apply_multiplier(&center.values, dx, |k| {
        Complex64::new(s.hbar * s.hbar * k * k, 0.0)
    });
    let residual: Vec<Complex64> = (0..grid.n)
        .map(|j| {
            let dphi_dt = (plus.values[j] - minus.values[j]) / (2.0 * dt_fd);
            let v = Complex64::new(0.5 * s.m * w * w * xs[j] * xs[j], lam * xs[j]);
            let h_phi = p2_phi[j] / (2.0 * s.m) + v * center.values[j];
            I * s.hbar * dphi_dt - h_phi
        })
        .collect();
    Ok(interior_norm(&residual, dx) / interior_norm(&center.values, dx))
}

/// Applies the metric operator η = exp[(mα̇x − αp)/ħ] to grid values through
/// its exact split form
///
/// ηψ = e^{imαα̇/2ħ} · e^{(mα̇/ħ)x} · F⁻¹[ e^{−αk}·1_{|k|≤cutoff} · Fψ ],
///
/// where the scalar is the BCH factor from splitting the commuting-commutator
/// exponential. Errors if ψ has spectral content beyond the cutoff above
/// [`BAND_LIMIT_REL`] of its spectral peak, because e^{−αk} amplifies exactly
/// that content.
pub fn apply_eta(
    values: &[Complex64],
    grid: &Grid,
    s: &Scenario,
    at: &AuxPoint,
    k_cutoff: f64,
) -> Result<Vec<Complex64>, OracleError> {
    let dx = grid.dx();
    let ks = fourier::wavenumbers(values.len(), dx);
    let mut spectrum = fourier::forward(values);
    let peak = spectrum.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let beyond = spectrum
        .iter()
        .zip(&ks)
        .filter(|(_, &k)| k.abs() > k_cutoff)
        .map(|(z, _)| z.norm())
        .fold(0.0_f64, f64::max);
    if beyond > BAND_LIMIT_REL * peak {
        return Err(OracleError::CutoffViolation { frac: beyond / peak });
    }
    for (z, &k) in spectrum.iter_mut().zip(&ks) {
        if k.abs() <= k_cutoff {
            *z *= (-at.alpha * k).exp();
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let mut out = fourier::inverse(&spectrum);
    let scalar = (I * (s.m * at.alpha * at.alpha_dot / (2.0 * s.hbar))).exp();
    for (v, x) in out.iter_mut().zip(grid.xs()) {
        *v *= scalar * (s.m * at.alpha_dot * x / s.hbar).exp();
    }
    Ok(out)
}

/// η-inner product ⟨ψ|ηψ⟩ of a grid state with itself at time t, via
/// [`apply_eta`] and trapezoidal quadrature. With α ≡ 0 this reduces to the
/// squared L² norm. The auxiliary trace supplies α, α̇ by dense evaluation.
pub fn eta_norm(
    psi: &WaveSample,
    s: &Scenario,
    aux: &AuxTrace,
    t: f64,
    k_cutoff: f64,
) -> Result<EtaNorm, OracleError> {
    let at = aux.eval(t)?;
    let eta_psi = apply_eta(&psi.values, &psi.grid, s, &at, k_cutoff)?;
    let inner = trapezoid_inner(&psi.values, &eta_psi, psi.grid.dx());
    Ok(EtaNorm { value: inner.re, imag: inner.im })
}

/// Extracts the phase of a propagated state relative to a reference
/// eigenfunction in the η metric: arg ⟨reference|η·state⟩. For an exact run
/// started from Φₙ(t0) with reference φₙ(t), this equals the cumulative phase
/// εₙ(t) modulo 2π.
pub fn overlap_phase(
    reference: &WaveSample,
    state: &WaveSample,
    s: &Scenario,
    aux: &AuxTrace,
    t: f64,
    k_cutoff: f64,
) -> Result<f64, OracleError> {
    assert_eq!(reference.grid.n, state.grid.n, "samples must share a grid");
    let at = aux.eval(t)?;
    let eta_state = apply_eta(&state.values, &state.grid, s, &at, k_cutoff)?;
    Ok(trapezoid_inner(&reference.values, &eta_state, state.grid.dx()).arg())
}
