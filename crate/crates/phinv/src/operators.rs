//! Truncated Fock-basis operator algebra.
//!
//! Position and momentum act as ladder-operator combinations at a reference
//! frequency; every operator of the construction — H(t), the metric
//! η(t) = exp[−(α/ħ)p + (mα̇/ħ)x], its square root ρ(t), and the invariants
//! I_h(t) and I_PH(t) — becomes a dense complex D×D matrix, and every algebraic
//! identity becomes a measurable matrix residual.
//!
//! Truncation corrupts the last rows/columns of operator products, so all
//! residuals are max-norms over an *interior block*: the top-left
//! (D−B)×(D−B) sub-matrix for a configurable edge band B (default D/8).
//! Time derivatives of operator families use centered differences with a
//! documented step, never hand-differentiated formulas, keeping the checks
//! independent of the analytic construction they test.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::auxsolve::{AuxError, AuxPoint, AuxTrace};
use crate::scenario::{Scenario, ScenarioError};
use crate::I;

type CMat = DMatrix<Complex64>;

/// Minimal supported truncation dimension.
pub const MIN_DIM: usize = 16;

/// Max-norm tolerance for matrices tagged Hermitian at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Padé-13 scaling threshold: backward error stays below double rounding for
/// scaled 1-norms under this value (Higham 2005).
const PADE13_THETA: f64 = 5.371920351148152;

/// Maximum number of squarings; beyond this the input norm is rejected.
const MAX_SQUARINGS: u32 = 40;

/// Errors from the Fock-basis algebra.
#[derive(Debug, Error)]
pub enum OperatorError {
    /// Truncation dimension below the supported minimum.
    #[error("fock dimension {dim} is below the minimum {MIN_DIM}")]
    DimTooSmall { dim: usize },
    /// A matrix tagged Hermitian failed the construction check.
    #[error("matrix `{label}` is not Hermitian: max deviation {dev:.3e}")]
    NotHermitian { label: String, dev: f64 },
    /// matrix_exp input norm too large even after maximal scaling.
    #[error("matrix exponential: 1-norm {norm:.3e} exceeds the scaling trust region")]
    NormTooLarge { norm: f64 },
    /// Singular matrix in an inverse or linear solve.
    #[error("singular matrix in `{context}`")]
    Singular { context: String },
    /// Hermitized η has a non-positive eigenvalue: truncation too small for
    /// the current displacement amplitude.
    #[error("metric lost positivity at t = {t} (min eigenvalue {min_eig:.3e}); increase fock_dim or shrink alpha")]
    EtaNotPositive { t: f64, min_eig: f64 },
    /// Auxiliary-solution access failed.
    #[error(transparent)]
    Aux(#[from] AuxError),
    /// Coefficient evaluation failed.
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// A dense complex operator matrix tagged with its dimension, the time it was
/// built at, and a human-readable label. Immutable after construction.
#[derive(Debug, Clone)]
pub struct OpMatrix {
    /// Truncation dimension D.
    pub dim: usize,
    /// D×D complex entries.
    pub entries: CMat,
    /// Time stamp the operator family was evaluated at.
    pub t: f64,
    /// Operator name, e.g. `"H"`, `"eta"`, `"I_PH"`.
    pub label: String,
}

impl OpMatrix {
    /// Wraps entries without any symmetry claim.
    pub fn new(label: &str, t: f64, entries: CMat) -> OpMatrix {
        let dim = entries.nrows();
        OpMatrix { dim, entries, t, label: label.to_string() }
    }

    /// Wraps entries that must be Hermitian to [`HERMITIAN_TOL`].
    pub fn hermitian(label: &str, t: f64, entries: CMat) -> Result<OpMatrix, OperatorError> {
        let dev = max_abs(&(&entries - entries.adjoint()));
        if dev >= HERMITIAN_TOL {
            return Err(OperatorError::NotHermitian { label: label.to_string(), dev });
        }
        Ok(OpMatrix::new(label, t, entries))
    }
}

/// Max absolute entry of a matrix.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max absolute entry over the interior block: the top-left (D−B)×(D−B)
/// sub-matrix, discarding the truncation-corrupted edge band B.
pub fn interior_max_abs(a: &CMat, band: usize) -> f64 {
    let keep = a.nrows().saturating_sub(band).max(1);
    a.view((0, 0), (keep, keep))
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm()))
}

/// 1-norm (max column sum of absolute values).
fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Ladder-operator position and momentum at a reference frequency:
/// X = (a + a†)·√(ħ/2mω_ref), P = i(a† − a)·√(mħω_ref/2). Both Hermitian.
pub fn fock_xp(
    dim: usize,
    m: f64,
    omega_ref: f64,
    hbar: f64,
) -> Result<(OpMatrix, OpMatrix), OperatorError> {
    if dim < MIN_DIM {
        return Err(OperatorError::DimTooSmall { dim });
    }
    let x_scale = (hbar / (2.0 * m * omega_ref)).sqrt();
    let p_scale = (m * hbar * omega_ref / 2.0).sqrt();
    let mut x = CMat::zeros(dim, dim);
    let mut p = CMat::zeros(dim, dim);
    for n in 0..dim - 1 {
        // a|n+1> = sqrt(n+1)|n>: entry (n, n+1); a†: entry (n+1, n).
        let root = ((n + 1) as f64).sqrt();
        x[(n, n + 1)] = Complex64::new(x_scale * root, 0.0);
        x[(n + 1, n)] = Complex64::new(x_scale * root, 0.0);
        p[(n, n + 1)] = Complex64::new(0.0, -p_scale * root);
        p[(n + 1, n)] = Complex64::new(0.0, p_scale * root);
    }
    Ok((
        OpMatrix::hermitian("X", 0.0, x)?,
        OpMatrix::hermitian("P", 0.0, p)?,
    ))
}

/// Matrix exponential by Padé-13 scaling and squaring (Higham 2005).
///
/// The argument is scaled by 2^(−s) until its 1-norm is below the Padé-13
/// threshold, the order-13 diagonal Padé approximant is evaluated, and the
/// result is squared s times. Backward error is below ~1e-12 throughout the
/// documented trust region (1-norm ≤ 30); inputs needing more than
/// [`MAX_SQUARINGS`] squarings are rejected.
pub fn matrix_exp(a: &CMat) -> Result<CMat, OperatorError> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let dim = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(OperatorError::NormTooLarge { norm });
    }
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    if s > MAX_SQUARINGS {
        return Err(OperatorError::NormTooLarge { norm });
    }
    let scale = Complex64::new((0.5f64).powi(s as i32), 0.0);
    let a1 = a * scale;
    let id = CMat::identity(dim, dim);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let c = |v: f64| Complex64::new(v, 0.0);
    let u_inner = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let u = &a1
        * (&a6 * u_inner + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &id * c(B[1]));
    let v_inner = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let v = &a6 * v_inner + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &id * c(B[0]);
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or(OperatorError::Singular { context: "matrix_exp Pade solve".into() })?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Matrix inverse via LU linear solves against the identity (partial
/// pivoting).
pub fn lu_inverse(a: &CMat) -> Result<CMat, OperatorError> {
    let dim = a.nrows();
    a.clone()
        .lu()
        .solve(&CMat::identity(dim, dim))
        .ok_or(OperatorError::Singular { context: "lu_inverse".into() })
}

/// 1-norm condition number κ₁(A) = ‖A‖₁·‖A⁻¹‖₁.
pub fn condition_number(a: &CMat) -> Result<f64, OperatorError> {
    Ok(one_norm(a) * one_norm(&lu_inverse(a)?))
}

/// All eigenvalues (complex Schur form), sorted by ascending real part.
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    let t = a.clone().schur().unpack().1;
    let mut eigs: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re));
    eigs
}

/// The two residuals of `check_similarity`, plus the explicit-form residual
/// of the conjugated Hamiltonian.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimilarityResiduals {
    /// ‖ρ I_PH ρ⁻¹ − I_h‖ over the interior block.
    pub invariant: f64,
    /// Hermiticity defect ‖h − h†‖ of h = ρHρ⁻¹ + iħρ̇ρ⁻¹, interior block.
    pub hermiticity: f64,
    /// ‖ρHρ⁻¹ − C‖ against the closed-form conjugation
    /// C = p²/2m + ½mω²x² + i(λ + mαω²/2)x + i(α̇/2)p − (mα̇²/8 + mω²α²/8 + αλ/2).
    pub explicit_form: f64,
}

/// One residual measurement, as serialized into the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualRecord {
    /// Check name, e.g. `"ph_relation"`.
    pub check: String,
    /// Evaluation time.
    pub t: f64,
    /// Truncation dimension.
    pub dim: usize,
    /// Centered-difference step (0 for derivative-free checks).
    pub dt: f64,
    /// Edge band B of the interior block.
    pub edge_band: usize,
    /// Interior-block max-norm residual.
    pub residual: f64,
    /// κ₁(η) at the evaluation time.
    pub condition_eta: f64,
}

/// Operator family over one scenario and auxiliary solution: builds all
/// matrices of the construction at any time inside (or one mesh cell beyond)
/// the solved interval. Pure given its inputs; checks at distinct times can
/// run concurrently.
pub struct FockModel<'a> {
    scenario: &'a Scenario,
    aux: &'a AuxTrace,
    /// Truncation dimension D.
    pub dim: usize,
    /// Reference frequency of the ladder basis (ω(t0) by default).
    pub omega_ref: f64,
    x: CMat,
    p: CMat,
    id: CMat,
}

impl<'a> FockModel<'a> {
    /// Builds the ladder-basis X, P at ω_ref = ω(t0).
    pub fn new(
        scenario: &'a Scenario,
        aux: &'a AuxTrace,
        dim: usize,
    ) -> Result<FockModel<'a>, OperatorError> {
        let omega_ref = scenario.eval_omega(scenario.t0)?;
        let (x, p) = fock_xp(dim, scenario.m, omega_ref, scenario.hbar)?;
        Ok(FockModel {
            scenario,
            aux,
            dim,
            omega_ref,
            x: x.entries,
            p: p.entries,
            id: CMat::identity(dim, dim),
        })
    }

    /// Position matrix.
    pub fn x(&self) -> &CMat {
        &self.x
    }

    /// Momentum matrix.
    pub fn p(&self) -> &CMat {
        &self.p
    }

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    /// H(t) = p²/2m + ½mω²(t)x² + iλ(t)x. This is the only builder that sees
    /// the `flip_lambda` mutation.
    pub fn build_h(&self, t: f64) -> Result<OpMatrix, OperatorError> {
        let s = self.scenario;
        let w = s.eval_omega(t)?;
        let l = s.hamiltonian_lambda(t)?;
        let h = &self.p * &self.p * Self::c(0.5 / s.m)
            + &self.x * &self.x * Self::c(0.5 * s.m * w * w)
            + &self.x * (I * l);
        Ok(OpMatrix::new("H", t, h))
    }

    /// The metric generator B(t) = [m α̇(t)·x − α(t)·p]/ħ, so that η = exp B.
    fn metric_generator(&self, at: &AuxPoint) -> CMat {
        let s = self.scenario;
        &self.x * Self::c(s.m * at.alpha_dot / s.hbar) - &self.p * Self::c(at.alpha / s.hbar)
    }

    /// η(t) = exp[−(α/ħ)p + (mα̇/ħ)x]; positivity of the Hermitized matrix is
    /// checked and failure signals a truncation too small for the current α.
    pub fn build_eta(&self, t: f64) -> Result<OpMatrix, OperatorError> {
        let eta = matrix_exp(&self.metric_generator(&self.aux.eval(t)?))?;
        let herm = (&eta + eta.adjoint()) * Self::c(0.5);
        let min_eig = herm
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &e| acc.min(e));
        if min_eig <= 0.0 {
            return Err(OperatorError::EtaNotPositive { t, min_eig });
        }
        Ok(OpMatrix::new("eta", t, eta))
    }

    /// ρ(t) = η^(1/2) = exp[B/2], the positive square root of the metric.
    pub fn build_rho(&self, t: f64) -> Result<OpMatrix, OperatorError> {
        let rho = matrix_exp(&(self.metric_generator(&self.aux.eval(t)?) * Self::c(0.5)))?;
        Ok(OpMatrix::new("rho", t, rho))
    }

    /// Oscillator invariant I_h(t) = ½[(σp − mσ̇x)² + (x/σ)²], i.e.
    /// ½[σ²p² − mσσ̇(px+xp) + (1/σ²)(1 + m²σ²σ̇²)x²], with spectrum ħ(n+½).
    pub fn build_ih(&self, t: f64) -> Result<OpMatrix, OperatorError> {
        let at = self.aux.eval(t)?;
        let ih = self.invariant_from(&self.x, &self.p, &at);
        OpMatrix::hermitian("I_h", t, ih)
    }

    /// Pseudo-Hermitian invariant I_PH(t): the same polynomial evaluated on
    /// the similarity-shifted operators x − iα/2 and p − imα̇/2.
    pub fn build_iph(&self, t: f64) -> Result<OpMatrix, OperatorError> {
        let at = self.aux.eval(t)?;
        let s = self.scenario;
        let xs = &self.x - &self.id * (I * (0.5 * at.alpha));
        let ps = &self.p - &self.id * (I * (0.5 * s.m * at.alpha_dot));
        Ok(OpMatrix::new("I_PH", t, self.invariant_from(&xs, &ps, &at)))
    }

    /// The invariant polynomial ½[σ²P² − mσσ̇(PX+XP) + (1/σ²)(1+m²σ²σ̇²)X²]
    /// on arbitrary (possibly shifted) position/momentum matrices.
    fn invariant_from(&self, x: &CMat, p: &CMat, at: &AuxPoint) -> CMat {
        let m = self.scenario.m;
        let (sig, sd) = (at.sigma, at.sigma_dot);
        let xx = x * x;
        let pp = p * p;
        let xp_sym = p * x + x * p;
        (pp * Self::c(sig * sig) - xp_sym * Self::c(m * sig * sd)
            + xx * Self::c((1.0 + m * m * sig * sig * sd * sd) / (sig * sig)))
            * Self::c(0.5)
    }

    /// Hermitian-side Hamiltonian h(t) = p²/2m + ½mω²x², up to the c-number
    /// −αλ/4 which drops out of every commutator and derivative it is used in.
    fn build_h_oscillator(&self, t: f64) -> Result<CMat, OperatorError> {
        let s = self.scenario;
        let w = s.eval_omega(t)?;
        Ok(&self.p * &self.p * Self::c(0.5 / s.m)
            + &self.x * &self.x * Self::c(0.5 * s.m * w * w))
    }

    /// κ₁(η(t)), reported alongside residuals.
    pub fn condition_eta(&self, t: f64) -> Result<f64, OperatorError> {
        condition_number(&self.build_eta(t)?.entries)
    }

    /// Generalized pseudo-Hermiticity residual
    /// ‖H† − ηHη⁻¹ − iħ·η̇η⁻¹‖ over the interior block, with η̇ from the
    /// centered difference at step `dt`.
    pub fn check_ph_relation(&self, t: f64, dt: f64, band: usize) -> Result<f64, OperatorError> {
        let s = self.scenario;
        let h = self.build_h(t)?.entries;
        let eta = self.build_eta(t)?.entries;
        let eta_inv = lu_inverse(&eta)?;
        let eta_dot = (self.build_eta(t + dt)?.entries - self.build_eta(t - dt)?.entries)
            * Self::c(0.5 / dt);
        let resid =
            h.adjoint() - &eta * &h * &eta_inv - eta_dot * &eta_inv * (I * s.hbar);
        Ok(interior_max_abs(&resid, band))
    }

    /// Liouville residual ‖∂ₜI_PH − (i/ħ)[I_PH, H]‖ over the interior block,
    /// with ∂ₜI_PH from the centered difference at step `dt`.
    pub fn check_liouville(&self, t: f64, dt: f64, band: usize) -> Result<f64, OperatorError> {
        let s = self.scenario;
        let iph = self.build_iph(t)?.entries;
        let h = self.build_h(t)?.entries;
        let iph_dot =
            (self.build_iph(t + dt)?.entries - self.build_iph(t - dt)?.entries) * Self::c(0.5 / dt);
        let resid = iph_dot - (&iph * &h - &h * &iph) * (I / s.hbar);
        Ok(interior_max_abs(&resid, band))
    }

    /// Hermitian counterpart ‖∂ₜI_h − (i/ħ)[I_h, h]‖: validates the harness
    /// itself on the ordinary oscillator invariant.
    pub fn check_liouville_hermitian(
        &self,
        t: f64,
        dt: f64,
        band: usize,
    ) -> Result<f64, OperatorError> {
        let s = self.scenario;
        let ih = self.build_ih(t)?.entries;
        let hosc = self.build_h_oscillator(t)?;
        let ih_dot =
            (self.build_ih(t + dt)?.entries - self.build_ih(t - dt)?.entries) * Self::c(0.5 / dt);
        let resid = ih_dot - (&ih * &hosc - &hosc * &ih) * (I / s.hbar);
        Ok(interior_max_abs(&resid, band))
    }

    /// Similarity residuals: ρI_PHρ⁻¹ vs I_h, Hermiticity of
    /// h = ρHρ⁻¹ + iħρ̇ρ⁻¹, and ρHρ⁻¹ vs its closed conjugated form.
    pub fn check_similarity(
        &self,
        t: f64,
        dt: f64,
        band: usize,
    ) -> Result<SimilarityResiduals, OperatorError> {
        let s = self.scenario;
        let at = self.aux.eval(t)?;
        let rho = self.build_rho(t)?.entries;
        let rho_inv = lu_inverse(&rho)?;
        let rho_dot =
            (self.build_rho(t + dt)?.entries - self.build_rho(t - dt)?.entries) * Self::c(0.5 / dt);
        let iph = self.build_iph(t)?.entries;
        let ih = self.build_ih(t)?.entries;
        let invariant = interior_max_abs(&(&rho * &iph * &rho_inv - &ih), band);

        let h_mat = self.build_h(t)?.entries;
        let conj_h = &rho * &h_mat * &rho_inv;
        let h_small = &conj_h + &rho_dot * &rho_inv * (I * s.hbar);
        let hermiticity = interior_max_abs(&(&h_small - h_small.adjoint()), band);

        // Closed form of the conjugation, from BCH with scalar commutators:
        // rho x rho^-1 = x + i alpha/2, rho p rho^-1 = p + i m alpha_dot/2.
        let w = s.eval_omega(t)?;
        let l = s.eval_lambda(t)?;
        let (al, ad) = (at.alpha, at.alpha_dot);
        let scalar =
            s.m * ad * ad / 8.0 + s.m * w * w * al * al / 8.0 + al * l / 2.0;
        let explicit = &self.p * &self.p * Self::c(0.5 / s.m)
            + &self.x * &self.x * Self::c(0.5 * s.m * w * w)
            + &self.x * (I * (l + 0.5 * s.m * al * w * w))
            + &self.p * (I * (0.5 * ad))
            - &self.id * Self::c(scalar);
        let explicit_form = interior_max_abs(&(conj_h - explicit), band);

        Ok(SimilarityResiduals { invariant, hermiticity, explicit_form })
    }

    /// Lowest `count` eigenvalues (by real part) of I_PH(t). These live in the
    /// truncation interior of the spectrum and should equal ħ(n+½) with
    /// vanishing imaginary parts.
    pub fn invariant_spectrum(&self, t: f64, count: usize) -> Result<Vec<Complex64>, OperatorError> {
        let eigs = eigenvalues(&self.build_iph(t)?.entries);
        Ok(eigs.into_iter().take(count).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_commutator_interior() {
        let (x, p) = fock_xp(32, 1.0, 1.0, 1.0).unwrap();
        let comm = &x.entries * &p.entries - &p.entries * &x.entries;
        let dev = interior_max_abs(
            &(&comm - CMat::identity(32, 32) * Complex64::new(0.0, 1.0)),
            4,
        );
        assert!(dev < 1e-12, "commutator deviation {dev}");
    }

    #[test]
    fn trace_x_squared_counts_levels() {
        // Diagonal of X^2 is (hbar/2momega)(2n+1) except at the top level,
        // where truncation drops the aa† reach-through: the matrix trace is
        // (hbar/2momega)(D^2 - D), i.e. 240/2 at D=16.
        let (x, _) = fock_xp(16, 1.0, 1.0, 1.0).unwrap();
        let x2 = &x.entries * &x.entries;
        let tr: f64 = (0..16).map(|i| x2[(i, i)].re).sum();
        assert!((tr * 2.0 - 240.0).abs() < 1e-10, "tr = {tr}");
        for n in 0..15 {
            assert!((x2[(n, n)].re * 2.0 - (2.0 * n as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_exp_identity_and_diagonal() {
        let z = CMat::zeros(4, 4);
        let e = matrix_exp(&z).unwrap();
        assert!(max_abs(&(&e - CMat::identity(4, 4))) < 1e-15);
        let mut d = CMat::zeros(3, 3);
        d[(0, 0)] = Complex64::new(1.0, 0.5);
        d[(1, 1)] = Complex64::new(-2.0, 0.0);
        d[(2, 2)] = Complex64::new(0.0, -3.0);
        let ed = matrix_exp(&d).unwrap();
        for i in 0..3 {
            assert!((ed[(i, i)] - d[(i, i)].exp()).norm() < 1e-13);
        }
    }
}
