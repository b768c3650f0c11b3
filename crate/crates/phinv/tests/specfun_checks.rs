//! Special-function kernels: Hermite recurrence identities, eigenfunction
//! normalization and orthogonality by quadrature, and an independent spectral
//! verification of the eigenvalue property.

use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

use phinv::specfun::{eigenfunction_ih, hermite};

#[test]
fn unit_norm_by_quadrature() {
    // Trapezoid over [-12, 12] at dx = 0.01: the ground-state norm is 1 to 1e-10.
    let dx = 0.01;
    let n_pts = 2401;
    let mut sum = 0.0;
    for j in 0..n_pts {
        let x = -12.0 + j as f64 * dx;
        let v = eigenfunction_ih(0, Complex64::new(x, 0.0), 1.0, 0.0, 1.0, 1.0).unwrap();
        let weight = if j == 0 || j == n_pts - 1 { 0.5 } else { 1.0 };
        sum += weight * v.norm_sqr();
    }
    let integral = sum * dx;
    assert!((integral - 1.0).abs() < 1e-10, "norm² = {integral}");
}

#[test]
fn orthonormality_up_to_six() {
    // Generic width parameters exercise the full complex Gaussian factor.
    let (sigma, sigma_dot, m, hbar) = (1.3, 0.4, 1.7, 1.0);
    let dx = 0.01;
    let n_pts = 2401;
    let xs: Vec<f64> = (0..n_pts).map(|j| -12.0 + j as f64 * dx).collect();
    let states: Vec<Vec<Complex64>> = (0..=6)
        .map(|n| {
            xs.iter()
                .map(|&x| {
                    eigenfunction_ih(n, Complex64::new(x, 0.0), sigma, sigma_dot, m, hbar)
                        .unwrap()
                })
                .collect()
        })
        .collect();
    for a in 0..=6usize {
        for b in 0..=6usize {
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n_pts {
                let weight = if j == 0 || j == n_pts - 1 { 0.5 } else { 1.0 };
                sum += weight * states[a][j].conj() * states[b][j];
            }
            let inner = sum * dx;
            let expected = if a == b { 1.0 } else { 0.0 };
            assert!(
                (inner.re - expected).abs() < 1e-8 && inner.im.abs() < 1e-8,
                "<{a}|{b}> = {inner}"
            );
        }
    }
}

#[test]
fn mode_bound_is_enforced() {
    assert!(hermite(200, Complex64::new(0.3, 0.1)).is_ok());
    let err = hermite(201, Complex64::new(0.3, 0.1)).unwrap_err();
    assert!(err.to_string().contains("exceeds"), "{err}");
}

#[test]
fn overflow_reports_instead_of_propagating_non_finite() {
    // Huge imaginary displacement overflows the Gaussian factor.
    let err = eigenfunction_ih(0, Complex64::new(0.0, 60.0), 1.0, 0.0, 1.0, 1.0).unwrap_err();
    assert!(err.to_string().contains("overflow"), "{err}");
}

/// Independent spectral check of the eigenvalue property: applying
/// I_h = ½[σ²p² − mσσ̇(px+xp) + (1 + m²σ²σ̇²)x²/σ²] to sampled ψₙ returns
/// ħ(n+½)·ψₙ. The operator is applied with FFT derivatives implemented here,
/// sharing no code with the library's own Fourier helpers.
#[test]
fn eigenfunction_property_under_spectral_invariant() {
    let (sigma, sigma_dot, m, hbar) = (1.3, 0.4, 1.7, 1.0);
    let (l, n_pts) = (14.0, 2048usize);
    let dx = 2.0 * l / (n_pts as f64 - 1.0);
    let xs: Vec<f64> = (0..n_pts).map(|j| -l + j as f64 * dx).collect();
    let ks: Vec<f64> = (0..n_pts)
        .map(|j| {
            let j_signed = if j < n_pts / 2 { j as isize } else { j as isize - n_pts as isize };
            2.0 * std::f64::consts::PI * j_signed as f64 / (n_pts as f64 * dx)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_pts);
    let ifft = planner.plan_fft_inverse(n_pts);
    let apply = |values: &[Complex64], mult: &dyn Fn(f64) -> Complex64| -> Vec<Complex64> {
        let mut buf = values.to_vec();
        fft.process(&mut buf);
        for (v, &k) in buf.iter_mut().zip(&ks) {
            *v *= mult(k);
        }
        ifft.process(&mut buf);
        let scale = 1.0 / n_pts as f64;
        buf.iter().map(|v| v * scale).collect()
    };

    for n in 0..5u32 {
        let psi: Vec<Complex64> = xs
            .iter()
            .map(|&x| eigenfunction_ih(n, Complex64::new(x, 0.0), sigma, sigma_dot, m, hbar).unwrap())
            .collect();
        let p2_psi = apply(&psi, &|k| Complex64::new(hbar * hbar * k * k, 0.0));
        let d_psi = apply(&psi, &|k| Complex64::new(0.0, k));
        let peak = psi.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let expected_eig = hbar * (n as f64 + 0.5);
        let mut worst = 0.0f64;
        for j in 0..n_pts {
            let x = xs[j];
            // (px + xp)ψ = −iħ(ψ + 2x·ψ').
            let sym = -Complex64::new(0.0, hbar) * (psi[j] + 2.0 * x * d_psi[j]);
            let ih_psi = 0.5
                * (sigma * sigma * p2_psi[j] - m * sigma * sigma_dot * sym
                    + (1.0 + m * m * sigma * sigma * sigma_dot * sigma_dot)
                        / (sigma * sigma)
                        * x
                        * x
                        * psi[j]);
            worst = worst.max((ih_psi - expected_eig * psi[j]).norm());
        }
        assert!(worst / peak < 1e-6, "n = {n}: relative defect {:.3e}", worst / peak);
    }
}

proptest! {
    /// Parity: Hₙ(−z) = (−1)ⁿ Hₙ(z); the recurrence preserves it term by term.
    #[test]
    fn hermite_parity(n in 0u32..=40, re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let z = Complex64::new(re, im);
        let plus = hermite(n, z).unwrap();
        let minus = hermite(n, -z).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let scale = plus.norm().max(1.0);
        prop_assert!((minus - sign * plus).norm() <= 1e-12 * scale);
    }

    /// Conjugation symmetry: Hₙ(z̄) = conj Hₙ(z) (real recurrence coefficients).
    #[test]
    fn hermite_conjugation(n in 0u32..=40, re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let z = Complex64::new(re, im);
        let direct = hermite(n, z.conj()).unwrap();
        let mirrored = hermite(n, z).unwrap().conj();
        let scale = direct.norm().max(1.0);
        prop_assert!((direct - mirrored).norm() <= 1e-12 * scale);
    }
}
