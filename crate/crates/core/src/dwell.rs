//! Weak dwell time of a spin-1/2 pre-selected with precession frequency ω and
//! post-selected with ω', under retarded (dissipative) dynamics.
//!
//! The pipeline is `(ω, ω') → (δ, γ) → τ`, with τ the integrated
//! finite-time weak survival probability over the window `T`. Two closed
//! forms are carried alongside the quadrature:
//!
//! * `tau_tanh = (1/γ)·tanh(γT/2)`, the exact antiderivative of the integrand;
//! * `tau_coth_paper = (1/γ)·coth(γT/2)`, the published expression.
//!
//! They agree only as `γT → ∞`; for small windows the coth form exceeds `T`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::retarded::delta_gamma_from_frequencies;
use crate::weakvalue::{weak_dwell_dissipationless, weak_dwell_quadrature, weak_dwell_tanh, PostSelectionSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellRequest {
    pub omega: f64,
    pub omega_prime: f64,
    /// `T = t_f - t_i`.
    pub window: f64,
}

impl DwellRequest {
    pub fn new(omega: f64, omega_prime: f64, window: f64) -> Result<Self> {
        let r = Self { omega, omega_prime, window };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(domain("omega", format!("must be positive, got {}", self.omega)));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(domain("T", format!("window must be positive, got {}", self.window)));
        }
        if !(self.omega_prime.is_finite() && self.omega_prime <= 2.0 * self.omega) {
            return Err(domain(
                "omega_prime",
                format!("omega' = {} must not exceed 2*omega = {}", self.omega_prime, 2.0 * self.omega),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DwellTimeReport {
    pub omega: f64,
    pub omega_prime: f64,
    #[serde(rename = "T")]
    pub window: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tau_quadrature: f64,
    pub tau_tanh: f64,
    pub tau_coth_paper: f64,
    /// `|tau_coth_paper - tau_quadrature| / tau_quadrature`.
    pub relative_discrepancy: f64,
    /// `1/γ`, the `T → ∞` value of both closed forms.
    pub asymptotic_limit: f64,
    /// Set exactly when `tau_coth_paper ≥ T` (a dwell time longer than the
    /// window it is measured in).
    pub coth_exceeds_window: bool,
}

/// Runs the full `(ω, ω', T)` pipeline.
///
/// `ω' = 2ω` gives `γ = 0`; that case is returned as
/// [`Error::DissipationlessCase`] carrying the `γ → 0` value `T/2`.
pub fn dwell_time(request: &DwellRequest) -> Result<DwellTimeReport> {
    request.validate()?;
    let DwellRequest { omega, omega_prime, window } = *request;
    let (delta, gamma) = delta_gamma_from_frequencies(omega, omega_prime)?;
    if gamma == 0.0 {
        return Err(Error::DissipationlessCase { window, tau_limit: weak_dwell_dissipationless(window) });
    }

    let spec = PostSelectionSpec::finite_time(gamma, 0.0, window)?;
    let tau_quadrature = weak_dwell_quadrature(&spec)?;
    let tau_tanh = weak_dwell_tanh(gamma, window);
    let tau_coth_paper = 1.0 / ((0.5 * gamma * window).tanh() * gamma);

    Ok(DwellTimeReport {
        omega,
        omega_prime,
        window,
        gamma,
        delta,
        tau_quadrature,
        tau_tanh,
        tau_coth_paper,
        relative_discrepancy: (tau_coth_paper - tau_quadrature).abs() / tau_quadrature,
        asymptotic_limit: 1.0 / gamma,
        coth_exceeds_window: tau_coth_paper >= window,
    })
}

/// Spin-up pre-selection, spin-down post-selection: `ω' = -ω`, so
/// `γ = 3ω/√2`.
pub fn dwell_spin_flip(omega: f64, window: f64) -> Result<DwellTimeReport> {
    dwell_time(&DwellRequest::new(omega, -omega, window)?)
}
