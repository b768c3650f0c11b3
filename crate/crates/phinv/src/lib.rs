//! Lewis-Riesenfeld invariants for the time-dependent non-Hermitian oscillator
//! `H(t) = p²/2m + ½ m ω²(t) x² + i λ(t) x` with real `λ(t)`.
//!
//! The library solves the two auxiliary ODEs (the Ermakov-Pinney equation for the
//! width function σ(t) and a driven linear equation for the displacement α(t)),
//! builds the closed-form solutions `Φₙ(x,t) = e^{i εₙ(t)} φₙ(x,t)` of the
//! non-Hermitian time-dependent Schrödinger equation, and verifies every operator
//! identity of the construction through two independent numerical oracles:
//!
//! * [`operators`] — truncated Fock-basis matrix algebra: metric operator
//!   η(t) = exp[−(α/ħ)p + (mα̇/ħ)x], its square root ρ, the invariants I_h and
//!   I_PH, and residual checks of the pseudo-Hermiticity, Liouville, and
//!   similarity relations;
//! * [`oracle`] — direct Crank-Nicolson grid propagation of the TDSE, η-norm
//!   conservation, and overlap-phase extraction, sharing no code with the
//!   invariant construction.
//!
//! Modules mirror the pipeline: [`scenario`] (configuration), [`auxsolve`]
//! (ODE solutions), [`specfun`] (Hermite/oscillator kernels), [`states`]
//! (wavefunctions, phases, η-inner products), [`operators`] and [`oracle`]
//! (the two oracles).

pub mod auxsolve;
mod fourier;
pub mod operators;
pub mod oracle;
pub mod scenario;
pub mod specfun;
pub mod states;

pub use num_complex::Complex64;

/// Imaginary unit, shared shorthand for the whole crate.
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);
