//! Auxiliary ODE solutions on a uniform time mesh.
//!
//! Two equations drive the whole construction:
//!
//! * the nonlinear Ermakov-Pinney equation for the width function,
//!   σ̈ + ω²(t)σ = 1/(m²σ³), and
//! * the driven linear equation for the displacement, m α̈ + m ω²(t) α + 2λ(t) = 0.
//!
//! Both are integrated as first-order systems with the classical fixed-step
//! fourth-order Runge-Kutta scheme; solution quality is certified afterwards by
//! evaluating the ODE residuals with centered finite differences on the stored
//! samples (independent of the integrator). Dense evaluation between mesh nodes
//! uses cubic Hermite interpolation fed by the ODE right-hand side, which keeps
//! the O(h⁴) accuracy of the integrator.

use std::io::{self, Write};

use thiserror::Error;

use crate::scenario::{Scenario, ScenarioError};

/// Errors from the auxiliary solvers.
#[derive(Debug, Error)]
pub enum AuxError {
    /// The Ermakov solution touched zero: the width must stay positive.
    #[error("sigma lost positivity at t = {t} (sigma = {sigma})")]
    PositivityLoss { t: f64, sigma: f64 },
    /// Overflow or NaN during integration.
    #[error("non-finite auxiliary value at t = {t}")]
    NonFinite { t: f64 },
    /// Dense evaluation more than one mesh cell outside the solved interval.
    #[error("t = {t} is outside the solved interval [{t0}, {t1}] by more than one mesh cell")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
    /// Coefficient evaluation failed (table range, etc.).
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Auxiliary functions evaluated at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxPoint {
    pub sigma: f64,
    pub sigma_dot: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
}

/// Sampled solutions σ, σ̇, α, α̇ on the scenario's uniform mesh, with
/// finite-difference residual certificates. Immutable after construction.
#[derive(Debug, Clone)]
pub struct AuxTrace {
    /// Uniform mesh t_k, k = 0..=K.
    pub mesh: Vec<f64>,
    /// σ(t_k) > 0.
    pub sigma: Vec<f64>,
    /// σ̇(t_k).
    pub sigma_dot: Vec<f64>,
    /// α(t_k).
    pub alpha: Vec<f64>,
    /// α̇(t_k).
    pub alpha_dot: Vec<f64>,
    /// max over interior nodes of |σ̈ + ω²σ − 1/(m²σ³)| with σ̈ from the
    /// second-order centered difference of the stored samples.
    pub residual_sigma: f64,
    /// max over interior nodes of |m α̈ + m ω² α + 2λ|, same stencil.
    pub residual_alpha: f64,
    /// σ̈(t_k) from the ODE right-hand side (dense-output derivative data).
    sigma_dd: Vec<f64>,
    /// α̈(t_k) from the ODE right-hand side.
    alpha_dd: Vec<f64>,
    /// Mesh step.
    h: f64,
}

/// One RK4 step of y' = f(t, y) for a 2-vector state.
fn rk4_step<F>(f: &F, t: f64, y: [f64; 2], h: f64) -> Result<[f64; 2], AuxError>
where
    F: Fn(f64, [f64; 2]) -> Result<[f64; 2], AuxError>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
    let k3 = f(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
    let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Integrates a second-order system over the scenario mesh, returning the
/// value and first-derivative samples.
fn integrate<F>(s: &Scenario, y0: [f64; 2], f: F) -> Result<(Vec<f64>, Vec<f64>), AuxError>
where
    F: Fn(f64, [f64; 2]) -> Result<[f64; 2], AuxError>,
{
    let mesh = s.mesh();
    let h = s.step();
    let mut val = Vec::with_capacity(mesh.len());
    let mut der = Vec::with_capacity(mesh.len());
    let mut y = y0;
    val.push(y[0]);
    der.push(y[1]);
    for k in 0..s.n_steps {
        y = rk4_step(&f, mesh[k], y, h)?;
        let t = mesh[k + 1];
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(AuxError::NonFinite { t });
        }
        val.push(y[0]);
        der.push(y[1]);
    }
    Ok((val, der))
}

/// Solves the Ermakov-Pinney equation σ̈ + ω²(t)σ = 1/(m²σ³) with RK4 on the
/// scenario mesh. Aborts on positivity loss or overflow.
pub fn solve_ermakov(
    s: &Scenario,
    sigma0: f64,
    sigma_dot0: f64,
) -> Result<(Vec<f64>, Vec<f64>), AuxError> {
    let m2 = s.m * s.m;
    let rhs = |t: f64, y: [f64; 2]| -> Result<[f64; 2], AuxError> {
        let (sig, sig_dot) = (y[0], y[1]);
        if sig <= 0.0 {
            return Err(AuxError::PositivityLoss { t, sigma: sig });
        }
        let w = s.eval_omega(t)?;
        Ok([sig_dot, 1.0 / (m2 * sig * sig * sig) - w * w * sig])
    };
    integrate(s, [sigma0, sigma_dot0], rhs)
}

/// Solves the displacement equation m α̈ + m ω²(t) α + 2λ(t) = 0 with RK4 on
/// the scenario mesh. Always uses the true λ(t): the Hamiltonian-side
/// `flip_lambda` mutation must not leak into the metric construction.
pub fn solve_alpha(
    s: &Scenario,
    alpha0: f64,
    alpha_dot0: f64,
) -> Result<(Vec<f64>, Vec<f64>), AuxError> {
    let rhs = |t: f64, y: [f64; 2]| -> Result<[f64; 2], AuxError> {
        let w = s.eval_omega(t)?;
        let l = s.eval_lambda(t)?;
        Ok([y[1], -w * w * y[0] - 2.0 * l / s.m])
    };
    integrate(s, [alpha0, alpha_dot0], rhs)
}

/// Max-norm ODE residuals over interior mesh nodes, with second derivatives
/// from the centered difference of the stored samples. Returns +inf on
/// non-finite input rather than erroring.
pub fn residuals(
    mesh: &[f64],
    sigma: &[f64],
    alpha: &[f64],
    s: &Scenario,
) -> Result<(f64, f64), AuxError> {
    let h = mesh[1] - mesh[0];
    let m2 = s.m * s.m;
    let mut res_s: f64 = 0.0;
    let mut res_a: f64 = 0.0;
    for k in 1..mesh.len() - 1 {
        let t = mesh[k];
        let w = s.eval_omega(t)?;
        let l = s.eval_lambda(t)?;
        let sdd = (sigma[k + 1] - 2.0 * sigma[k] + sigma[k - 1]) / (h * h);
        let add = (alpha[k + 1] - 2.0 * alpha[k] + alpha[k - 1]) / (h * h);
        let rs = sdd + w * w * sigma[k] - 1.0 / (m2 * sigma[k].powi(3));
        let ra = s.m * add + s.m * w * w * alpha[k] + 2.0 * l;
        res_s = if rs.is_finite() { res_s.max(rs.abs()) } else { f64::INFINITY };
        res_a = if ra.is_finite() { res_a.max(ra.abs()) } else { f64::INFINITY };
    }
    Ok((res_s, res_a))
}

impl AuxTrace {
    /// Solves both auxiliary equations with the scenario's initial conditions
    /// (documented defaults: σ(t0) = (mω(t0))^(−1/2), σ̇ = α = α̇ = 0) and
    /// certifies the result with finite-difference residuals.
    pub fn solve(s: &Scenario) -> Result<AuxTrace, AuxError> {
        let (sigma, sigma_dot) = solve_ermakov(s, s.sigma0()?, s.sigma_dot0)?;
        let (alpha, alpha_dot) = solve_alpha(s, s.alpha0, s.alpha_dot0)?;
        let mesh = s.mesh();
        let (residual_sigma, residual_alpha) = residuals(&mesh, &sigma, &alpha, s)?;
        // Node second derivatives from the ODE right-hand sides, for dense
        // cubic-Hermite evaluation of σ̇ and α̇.
        let m2 = s.m * s.m;
        let mut sigma_dd = Vec::with_capacity(mesh.len());
        let mut alpha_dd = Vec::with_capacity(mesh.len());
        for (k, &t) in mesh.iter().enumerate() {
            let w = s.eval_omega(t)?;
            let l = s.eval_lambda(t)?;
            sigma_dd.push(1.0 / (m2 * sigma[k].powi(3)) - w * w * sigma[k]);
            alpha_dd.push(-w * w * alpha[k] - 2.0 * l / s.m);
        }
        let h = s.step();
        Ok(AuxTrace {
            mesh,
            sigma,
            sigma_dot,
            alpha,
            alpha_dot,
            residual_sigma,
            residual_alpha,
            sigma_dd,
            alpha_dd,
            h,
        })
    }

    /// The eliminated momentum-side coefficient β(t) = −m α̇(t).
    pub fn beta(&self, m: f64) -> Vec<f64> {
        self.alpha_dot.iter().map(|ad| -m * ad).collect()
    }

    /// Dense evaluation by cubic Hermite interpolation on the mesh cell
    /// containing `t`. Times up to one mesh cell beyond either end are
    /// admitted (the boundary cell's cubic is extended), which keeps centered
    /// time differences usable at the sweep endpoints.
    pub fn eval(&self, t: f64) -> Result<AuxPoint, AuxError> {
        let (t0, t1) = (self.mesh[0], self.mesh[self.mesh.len() - 1]);
        if t < t0 - self.h || t > t1 + self.h {
            return Err(AuxError::OutOfRange { t, t0, t1 });
        }
        let cells = self.mesh.len() - 1;
        let k = (((t - t0) / self.h).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let u = (t - self.mesh[k]) / self.h;
        let cubic = |f0: f64, d0: f64, f1: f64, d1: f64| {
            let u2 = u * u;
            let u3 = u2 * u;
            (2.0 * u3 - 3.0 * u2 + 1.0) * f0
                + (u3 - 2.0 * u2 + u) * self.h * d0
                + (-2.0 * u3 + 3.0 * u2) * f1
                + (u3 - u2) * self.h * d1
        };
        Ok(AuxPoint {
            sigma: cubic(self.sigma[k], self.sigma_dot[k], self.sigma[k + 1], self.sigma_dot[k + 1]),
            sigma_dot: cubic(
                self.sigma_dot[k],
                self.sigma_dd[k],
                self.sigma_dot[k + 1],
                self.sigma_dd[k + 1],
            ),
            alpha: cubic(self.alpha[k], self.alpha_dot[k], self.alpha[k + 1], self.alpha_dot[k + 1]),
            alpha_dot: cubic(
                self.alpha_dot[k],
                self.alpha_dd[k],
                self.alpha_dot[k + 1],
                self.alpha_dd[k + 1],
            ),
        })
    }

    /// Values at mesh node `k` without interpolation.
    pub fn at_index(&self, k: usize) -> AuxPoint {
        AuxPoint {
            sigma: self.sigma[k],
            sigma_dot: self.sigma_dot[k],
            alpha: self.alpha[k],
            alpha_dot: self.alpha_dot[k],
        }
    }

    /// Writes the trace as CSV with header `t,sigma,sigma_dot,alpha,alpha_dot`
    /// at full double precision (17 significant digits).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,sigma,sigma_dot,alpha,alpha_dot")?;
        for k in 0..self.mesh.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.mesh[k], self.sigma[k], self.sigma_dot[k], self.alpha[k], self.alpha_dot[k]
            )?;
        }
        Ok(())
    }
}
