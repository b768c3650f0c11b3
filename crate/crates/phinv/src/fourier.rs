//! Crate-private FFT helpers for spectral derivative application and Fourier
//! multipliers on uniformly sampled complex data.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Angular wavenumbers in FFT ordering for `n` samples at spacing `dx`:
/// k_j = 2π·j/(n·dx) for j < n/2, then the negative branch.
pub(crate) fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let period = n as f64 * dx;
    (0..n)
        .map(|j| {
            let j_signed = if j <= (n - 1) / 2 { j as isize } else { j as isize - n as isize };
            2.0 * std::f64::consts::PI * j_signed as f64 / period
        })
        .collect()
}

/// Forward FFT (unnormalized, rustfft convention).
pub(crate) fn forward(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(values.len()).process(&mut buf);
    buf
}

/// Inverse FFT including the 1/n normalization, so `inverse(forward(v)) = v`.
pub(crate) fn inverse(spectrum: &[Complex64]) -> Vec<Complex64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Applies a wavenumber-space multiplier: returns F⁻¹[g(k)·F[values]].
pub(crate) fn apply_multiplier<G>(values: &[Complex64], dx: f64, g: G) -> Vec<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    let ks = wavenumbers(values.len(), dx);
    let mut spec = forward(values);
    for (z, &k) in spec.iter_mut().zip(&ks) {
        *z *= g(k);
    }
    inverse(&spec)
}
