//! Special-function kernels shared by the state builders and the oracles:
//! physicists' Hermite polynomials at complex argument and the oscillator
//! invariant's eigenfunction evaluated at (possibly complex) position.

use num_complex::Complex64;
use thiserror::Error;

use crate::I;

/// Highest mode index for which the upward Hermite recurrence is accurate in
/// double precision at |z| ≤ 20.
pub const MAX_HERMITE_N: u32 = 200;

/// Errors from the special-function kernels.
#[derive(Debug, Error)]
pub enum SpecFunError {
    /// Mode index beyond the documented recurrence stability bound.
    #[error("mode index n = {n} exceeds the supported bound {MAX_HERMITE_N}")]
    ModeTooLarge { n: u32 },
    /// Overflow, typically from a large imaginary part of the argument.
    #[error("eigenfunction overflowed at z = {z} (n = {n})")]
    NonFinite { n: u32, z: Complex64 },
}

/// Physicists' Hermite polynomial Hₙ(z) by the three-term recurrence
/// H₀ = 1, H₁ = 2z, H_{k+1} = 2z·H_k − 2k·H_{k−1}.
///
/// The argument may be complex: Hₙ is entire, so direct evaluation of the
/// recurrence *is* the analytic continuation.
pub fn hermite(n: u32, z: Complex64) -> Result<Complex64, SpecFunError> {
    if n > MAX_HERMITE_N {
        return Err(SpecFunError::ModeTooLarge { n });
    }
    let mut h_prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return Ok(h_prev);
    }
    let mut h = 2.0 * z;
    for k in 1..n {
        let h_next = 2.0 * z * h - 2.0 * (k as f64) * h_prev;
        h_prev = h;
        h = h_next;
    }
    Ok(h)
}

/// Eigenfunction of the oscillator invariant at mode `n`, evaluated at the
/// complex position `z`:
///
/// ψₙ(z) = [n!·2ⁿ·σ·√(πħ)]^(−1/2) · exp[(im/2ħ)(σ̇/σ + i/(mσ²)) z²] · Hₙ(z/(√ħ·σ))
///
/// The normalization uses the positive real root of σ; the log-domain
/// factorial keeps the constant finite for all supported n.
pub fn eigenfunction_ih(
    n: u32,
    z: Complex64,
    sigma: f64,
    sigma_dot: f64,
    m: f64,
    hbar: f64,
) -> Result<Complex64, SpecFunError> {
    debug_assert!(sigma > 0.0 && m > 0.0 && hbar > 0.0);
    // ln(n! 2^n sigma sqrt(pi hbar)), summed in the log domain.
    let mut log_norm = (n as f64) * std::f64::consts::LN_2
        + (sigma * (std::f64::consts::PI * hbar).sqrt()).ln();
    for k in 2..=n {
        log_norm += (k as f64).ln();
    }
    let norm = (-0.5 * log_norm).exp();
    let gauss_exponent = I * (m / (2.0 * hbar)) * (sigma_dot / sigma) * z * z
        - z * z / (2.0 * hbar * sigma * sigma);
    let value = norm * gauss_exponent.exp() * hermite(n, z / (hbar.sqrt() * sigma))?;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(SpecFunError::NonFinite { n, z });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_base_cases() {
        let one = hermite(0, Complex64::new(3.7, -1.2)).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
        let h1 = hermite(1, Complex64::new(0.5, 0.0)).unwrap();
        assert!((h1 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermite_2_at_i() {
        // H2(z) = 4z^2 - 2, so H2(i) = -6.
        let h2 = hermite(2, Complex64::new(0.0, 1.0)).unwrap();
        assert!((h2 - Complex64::new(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ground_state_peak_value() {
        let v = eigenfunction_ih(0, Complex64::new(0.0, 0.0), 1.0, 0.0, 1.0, 1.0).unwrap();
        let expected = std::f64::consts::PI.powf(-0.25);
        assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-15);
    }
}
