//! Retarded (finite-difference-in-time) Schrödinger dynamics of a spin-1/2 in
//! a static field along z.
//!
//! With the ground-state energy subtracted, `H - H₀ = 2ω·diag(1, 0)` and the
//! ansatz `ψ(t) = e^{-αt} ψ(0)` gives `α = (1/δ)·ln(1 + i(H - H₀)δ)`. Only
//! the excited component evolves:
//!
//! ```text
//! ψ_up(t) = exp[-(t/δ)·ln(1 + 2iωδ)] ψ_up(0),   ψ_down(t) = ψ_down(0)
//! ```
//!
//! Expanding the logarithm to third order in `2ωδ` yields a modified
//! precession frequency `ω' = 2ω(1 - 4ω²δ²/3)` and an amplitude decay rate
//! `γ = 2ω²δ`. [`delta_gamma_from_frequencies`] inverts that relation.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::qcore::{Operator2, SpinState, Spinor};

/// `(2ωδ)²` at or above which the third-order expansion is flagged.
pub const EXPANSION_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedParams {
    omega: f64,
    delta: f64,
}

impl RetardedParams {
    pub fn new(omega: f64, delta: f64) -> Result<Self> {
        check_omega(omega)?;
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(domain("delta", format!("retardation time must be >= 0, got {delta}")));
        }
        Ok(Self { omega, delta })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(2ωδ)²`, the expansion parameter.
    pub fn expansion_parameter(&self) -> f64 {
        let x = 2.0 * self.omega * self.delta;
        x * x
    }

    /// False when the third-order closed forms should not be trusted.
    pub fn expansion_valid(&self) -> bool {
        self.expansion_parameter() < EXPANSION_LIMIT
    }
}

/// Third-order effective precession frequency and decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub omega_prime: f64,
    pub gamma: f64,
    /// Set when `(2ωδ)² ≥ 0.5`; the values are still returned.
    pub expansion_warning: bool,
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain("omega", format!("precession frequency must be positive, got {omega}")));
    }
    Ok(())
}

fn check_positive_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(domain("delta", format!("retardation time must be positive, got {delta}")));
    }
    Ok(())
}

/// `(1/δ)·ln(1 + 2iωδ)`, principal branch.
fn upper_exponent(omega: f64, delta: f64) -> Complex64 {
    Complex64::new(1.0, 2.0 * omega * delta).ln() / delta
}

/// Generator `α = diag((1/δ)·ln(1 + 2iωδ), 0)` of the ground-stabilized
/// retarded evolution `ψ(t) = e^{-αt} ψ(0)`.
pub fn retarded_generator(omega: f64, delta: f64) -> Result<Operator2> {
    check_omega(omega)?;
    check_positive_delta(delta)?;
    Ok(Operator2::diag(upper_exponent(omega, delta), Complex64::new(0.0, 0.0)))
}

/// Unnormalized state after retarded evolution, plus its squared norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedState {
    pub amplitudes: Spinor,
    /// `|ψ(t)|²`; below 1 whenever the excited component is populated.
    pub survival_norm: f64,
}

/// Applies `e^{-αt}` to `state0`. The ground component is passed through
/// untouched.
pub fn retarded_evolve(state0: &SpinState, omega: f64, delta: f64, t: f64) -> Result<RetardedState> {
    check_omega(omega)?;
    check_positive_delta(delta)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain("t", format!("evolution time must be >= 0, got {t}")));
    }
    evolve_spinor(&state0.spinor(), omega, delta, t)
}

/// [`retarded_evolve`] on an arbitrary (possibly already decayed) spinor.
pub fn evolve_spinor(v: &Spinor, omega: f64, delta: f64, t: f64) -> Result<RetardedState> {
    check_omega(omega)?;
    check_positive_delta(delta)?;
    let factor = (-upper_exponent(omega, delta) * t).exp();
    let amplitudes = [v[0] * factor, v[1]];
    Ok(RetardedState { amplitudes, survival_norm: amplitudes[0].norm_sqr() + amplitudes[1].norm_sqr() })
}

/// Exact modulus of the excited-state factor, `(1 + 4ω²δ²)^{-t/(2δ)}`.
pub fn upper_modulus(omega: f64, delta: f64, t: f64) -> f64 {
    (1.0 + 4.0 * omega * omega * delta * delta).powf(-t / (2.0 * delta))
}

/// `ω' = 2ω(1 - 4ω²δ²/3)`, `γ = 2ω²δ`.
pub fn effective_params(omega: f64, delta: f64) -> Result<EffectiveParams> {
    let params = RetardedParams::new(omega, delta)?;
    Ok(EffectiveParams {
        omega_prime: 2.0 * omega * (1.0 - 4.0 * omega * omega * delta * delta / 3.0),
        gamma: 2.0 * omega * omega * delta,
        expansion_warning: !params.expansion_valid(),
    })
}

/// Inverts [`effective_params`]: `s = √(3(1 - ω'/2ω))`, `δ = s/2ω`,
/// `γ = ω s`.
///
/// `ω' > 2ω` would need an imaginary `δ` and is rejected.
pub fn delta_gamma_from_frequencies(omega: f64, omega_prime: f64) -> Result<(f64, f64)> {
    check_omega(omega)?;
    if !omega_prime.is_finite() {
        return Err(domain("omega_prime", "must be finite"));
    }
    if omega_prime > 2.0 * omega {
        return Err(domain("omega_prime", format!("omega' = {omega_prime} exceeds 2*omega = {}", 2.0 * omega)));
    }
    let s = (3.0 * (1.0 - omega_prime / (2.0 * omega))).sqrt();
    Ok((s / (2.0 * omega), omega * s))
}
