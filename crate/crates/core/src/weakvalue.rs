//! Weak survival probability of a decaying excited state and its time
//! integral, the weak dwell time.
//!
//! With `z = -γ + i k dE`,
//!
//! ```text
//! asymptotic:  P_w(t) = e^{-γ(t - t_i)} (1 - e^{z (t_f - t)})   / (1 - e^{z (t_f - t_i)})
//! finite time: P_w(t) = e^{-γ(t - t_i)} (1 - e^{-2γ (t_f - t)}) / (1 - e^{-2γ (t_f - t_i)})
//! ```
//!
//! The finite-time form integrates to `(1/γ)·tanh(γT/2)`, `T = t_f - t_i`.

use num_complex::Complex64;

use crate::bath::{closed_form_bath_amplitude, closed_form_propagator};
use crate::error::{domain, Error, Result};
use crate::qcore::{exp_m1, time_dependent_weak_value, Operator2, SpinState};
use crate::quad;

/// `|1 - e^{z T}|` must exceed this.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostSelectionKind {
    /// Post-selection on the state reached as `t → ∞`.
    Asymptotic,
    /// Post-selection at finite `t_f` (resonant photon only).
    FiniteTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelectionSpec {
    kind: PostSelectionKind,
    k: i64,
    delta_e: f64,
    gamma: f64,
    t_i: f64,
    t_f: f64,
}

impl PostSelectionSpec {
    /// Post-selection on the bath level `k` (photon energy `k·dE`).
    pub fn asymptotic(k: i64, delta_e: f64, gamma: f64, t_i: f64, t_f: f64) -> Result<Self> {
        Self::validated(PostSelectionKind::Asymptotic, k, delta_e, gamma, t_i, t_f)
    }

    pub fn finite_time(gamma: f64, t_i: f64, t_f: f64) -> Result<Self> {
        Self::validated(PostSelectionKind::FiniteTime, 0, 0.0, gamma, t_i, t_f)
    }

    pub fn new(kind: PostSelectionKind, k: i64, delta_e: f64, gamma: f64, t_i: f64, t_f: f64) -> Result<Self> {
        Self::validated(kind, k, delta_e, gamma, t_i, t_f)
    }

    fn validated(kind: PostSelectionKind, k: i64, delta_e: f64, gamma: f64, t_i: f64, t_f: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(domain("gamma", format!("decay constant must be positive, got {gamma}")));
        }
        if !(t_i.is_finite() && t_f.is_finite() && t_f > t_i) {
            return Err(domain("window", format!("need t_f > t_i, got [{t_i}, {t_f}]")));
        }
        if !delta_e.is_finite() {
            return Err(domain("delta_e", "must be finite"));
        }
        if kind == PostSelectionKind::FiniteTime && k != 0 {
            return Err(domain("k", "finite-time post-selection is defined for k = 0 only"));
        }
        Ok(Self { kind, k, delta_e, gamma, t_i, t_f })
    }

    pub fn kind(&self) -> PostSelectionKind {
        self.kind
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_i(&self) -> f64 {
        self.t_i
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn window(&self) -> f64 {
        self.t_f - self.t_i
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(self.t_i <= t && t <= self.t_f) {
            return Err(domain("time", format!("t = {t} outside [t_i, t_f] = [{}, {}]", self.t_i, self.t_f)));
        }
        Ok(())
    }

    /// Evaluates whichever variant `kind` selects.
    pub fn survival(&self, t: f64) -> Result<WeakSurvival> {
        match self.kind {
            PostSelectionKind::Asymptotic => survival_weak_value(self, t),
            PostSelectionKind::FiniteTime => survival_weak_value_finite(self, t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakSurvival {
    pub value: Complex64,
    pub t: f64,
}

/// `e^{-γ(t - t_i)} (1 - e^{z s}) / (1 - e^{z T})` with `s = t_f - t`.
fn survival_ratio(gamma: f64, z: Complex64, t_i: f64, t: f64, t_f: f64) -> Result<Complex64> {
    let denominator = -exp_m1(z * (t_f - t_i));
    if !(denominator.norm() > DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateDenominator(denominator.norm()));
    }
    let numerator = -exp_m1(z * (t_f - t));
    Ok(numerator / denominator * (-gamma * (t - t_i)).exp())
}

/// Weak value of the excited-state projector at time `t`, post-selected on
/// bath level `k` (the asymptotic form). Real when `k = 0`.
pub fn survival_weak_value(spec: &PostSelectionSpec, t: f64) -> Result<WeakSurvival> {
    spec.check_time(t)?;
    let z = Complex64::new(-spec.gamma, spec.k as f64 * spec.delta_e);
    let value = survival_ratio(spec.gamma, z, spec.t_i, t, spec.t_f)?;
    Ok(WeakSurvival { value, t })
}

/// Finite-time post-selection variant (decay rate doubled in the bracket).
pub fn survival_weak_value_finite(spec: &PostSelectionSpec, t: f64) -> Result<WeakSurvival> {
    if spec.kind != PostSelectionKind::FiniteTime {
        return Err(domain("kind", "finite-time survival needs a finite_time spec"));
    }
    spec.check_time(t)?;
    let z = Complex64::new(-2.0 * spec.gamma, 0.0);
    let value = survival_ratio(spec.gamma, z, spec.t_i, t, spec.t_f)?;
    Ok(WeakSurvival { value: Complex64::new(value.re, 0.0), t })
}

/// Same quantity as [`survival_weak_value`], assembled from the bath
/// propagator columns through the generic time-dependent weak value:
/// pre = excited reference atom, post = bath level `k`, operator = projector
/// on the reference atom.
pub fn survival_from_propagators(spec: &PostSelectionSpec, t: f64, coupling: f64) -> Result<Complex64> {
    if !(coupling.is_finite() && coupling != 0.0) {
        return Err(domain("coupling", "a non-zero coupling is needed to reach level k"));
    }
    let (k, gamma, de) = (spec.k, spec.gamma, spec.delta_e);
    // Two-dimensional slice {|0⟩, |k⟩}; only the first column enters.
    let evolve = |tau: f64| {
        let u00 = closed_form_propagator(0, coupling, gamma, de, tau).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let uk0 = closed_form_bath_amplitude(k, coupling, gamma, de, tau).unwrap_or(Complex64::new(f64::NAN, 0.0));
        Operator2::new(u00, Complex64::new(0.0, 0.0), uk0, Complex64::new(1.0, 0.0))
    };
    let excited = SpinState::z_plus();
    let emitted = SpinState::z_minus();
    let projector = Operator2::projector(&excited);
    time_dependent_weak_value(&excited, &emitted, &projector, spec.t_i, t, spec.t_f, evolve)
}

/// Weak dwell time: the finite-time survival weak value integrated over
/// `[t_i, t_f]` by adaptive Simpson (absolute tolerance 1e-10, depth 40).
///
/// The integral is taken in `u = γ(t - t_i)` and divided by `γ`, so the
/// panel tree depends on `γT` alone and rescaled windows reproduce it exactly.
pub fn weak_dwell_quadrature(spec: &PostSelectionSpec) -> Result<f64> {
    if spec.kind != PostSelectionKind::FiniteTime {
        return Err(domain("kind", "dwell quadrature needs a finite_time spec"));
    }
    // Surface a degenerate denominator before the quadrature swallows it.
    survival_weak_value_finite(spec, spec.t_i)?;
    let gamma = spec.gamma;
    let integrand = |u: f64| {
        let t = (spec.t_i + u / gamma).min(spec.t_f);
        survival_weak_value_finite(spec, t).map(|w| w.value.re).unwrap_or(f64::NAN)
    };
    Ok(quad::integrate(integrand, 0.0, gamma * spec.window())? / gamma)
}

/// Closed form of [`weak_dwell_quadrature`]: `(1/γ)·tanh(γT/2)`.
pub fn weak_dwell_tanh(gamma: f64, window: f64) -> f64 {
    (0.5 * gamma * window).tanh() / gamma
}

/// `γ → 0` limit of the dwell integral: the integrand becomes
/// `(t_f - t)/(t_f - t_i)`, giving `T/2`.
pub fn weak_dwell_dissipationless(window: f64) -> f64 {
    0.5 * window
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(PostSelectionSpec::finite_time(0.0, 0.0, 1.0).is_err());
        assert!(PostSelectionSpec::finite_time(1.0, 1.0, 1.0).is_err());
        assert!(PostSelectionSpec::new(PostSelectionKind::FiniteTime, 2, 0.1, 1.0, 0.0, 1.0).is_err());
        assert!(PostSelectionSpec::asymptotic(2, 0.1, 1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn boundary_values() {
        let s = PostSelectionSpec::asymptotic(3, 0.7, 0.4, -1.0, 2.5).unwrap();
        assert_eq!(survival_weak_value(&s, -1.0).unwrap().value, Complex64::new(1.0, 0.0));
        assert_eq!(survival_weak_value(&s, 2.5).unwrap().value.norm(), 0.0);
        let f = PostSelectionSpec::finite_time(0.4, -1.0, 2.5).unwrap();
        assert_eq!(survival_weak_value_finite(&f, -1.0).unwrap().value, Complex64::new(1.0, 0.0));
        assert_eq!(survival_weak_value_finite(&f, 2.5).unwrap().value.norm(), 0.0);
    }

    #[test]
    fn resonant_midpoint_value() {
        // e^{-1}(1 - e^{-1})/(1 - e^{-2}) = 1/(e + 1)
        let s = PostSelectionSpec::asymptotic(0, 0.0, 1.0, 0.0, 2.0).unwrap();
        let v = survival_weak_value(&s, 1.0).unwrap().value;
        assert!((v.re - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-15);
        assert!((v.re - 0.26894).abs() < 1e-5);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn finite_midpoint_value() {
        // e^{-1}(1 - e^{-2})/(1 - e^{-4}) = 1/(e + e^{-1}) = 1/(2 cosh 1)
        let s = PostSelectionSpec::finite_time(1.0, 0.0, 2.0).unwrap();
        let v = survival_weak_value_finite(&s, 1.0).unwrap().value.re;
        assert!((v - 0.5 / 1f64.cosh()).abs() < 1e-15);
        assert!((v - 0.32402).abs() < 1e-5);
    }

    #[test]
    fn out_of_window_and_wrong_kind() {
        let s = PostSelectionSpec::finite_time(1.0, 0.0, 2.0).unwrap();
        assert!(matches!(survival_weak_value_finite(&s, 2.1), Err(Error::DomainError { .. })));
        let a = PostSelectionSpec::asymptotic(0, 0.1, 1.0, 0.0, 2.0).unwrap();
        assert!(survival_weak_value_finite(&a, 1.0).is_err());
        assert!(weak_dwell_quadrature(&a).is_err());
    }

    #[test]
    fn degenerate_denominator() {
        let s = PostSelectionSpec::asymptotic(0, 0.0, 1e-14, 0.0, 1e-2).unwrap();
        assert!(matches!(survival_weak_value(&s, 0.0), Err(Error::DegenerateDenominator(_))));
    }

    #[test]
    fn dwell_examples() {
        let s = PostSelectionSpec::finite_time(1.0, 0.0, 2.0).unwrap();
        let tau = weak_dwell_quadrature(&s).unwrap();
        assert!((tau - 1f64.tanh()).abs() < 1e-10);
        assert!((tau - 0.761594).abs() < 1e-6);

        let long = PostSelectionSpec::finite_time(1.0, 0.0, 50.0).unwrap();
        assert!((weak_dwell_quadrature(&long).unwrap() - 1.0).abs() < 1e-8);

        let short = PostSelectionSpec::finite_time(1.0, 0.0, 1e-3).unwrap();
        let v = weak_dwell_quadrature(&short).unwrap();
        assert!(((v - 5e-4) / 5e-4).abs() < 1e-6);
    }

    #[test]
    fn dwell_scaling() {
        for t in [0.3, 2.0, 7.5] {
            let a = weak_dwell_quadrature(&PostSelectionSpec::finite_time(2.0, 0.0, t).unwrap()).unwrap();
            let b = weak_dwell_quadrature(&PostSelectionSpec::finite_time(1.0, 0.0, 2.0 * t).unwrap()).unwrap();
            assert!((a - b / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dwell_is_shift_invariant() {
        let a = weak_dwell_quadrature(&PostSelectionSpec::finite_time(0.7, 0.0, 3.0).unwrap()).unwrap();
        let b = weak_dwell_quadrature(&PostSelectionSpec::finite_time(0.7, 10.0, 13.0).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn propagator_composition_matches_formula() {
        let s = PostSelectionSpec::asymptotic(4, 0.05, 0.3, 0.5, 6.0).unwrap();
        for t in [0.5, 1.0, 3.3, 6.0] {
            let direct = survival_weak_value(&s, t).unwrap().value;
            let composed = survival_from_propagators(&s, t, 0.01).unwrap();
            assert!((direct - composed).norm() < 1e-12, "t={t}: {direct} vs {composed}");
        }
    }

    #[test]
    fn resonant_level_composition() {
        let s = PostSelectionSpec::asymptotic(0, 0.05, 0.7, -1.0, 4.0).unwrap();
        for t in [-1.0, 0.2, 2.5, 4.0] {
            let direct = survival_weak_value(&s, t).unwrap().value;
            let composed = survival_from_propagators(&s, t, 0.1).unwrap();
            assert!((direct - composed).norm() < 1e-12, "t={t}: {direct} vs {composed}");
        }
    }

    #[test]
    fn composition_needs_coupling() {
        let s = PostSelectionSpec::asymptotic(1, 0.05, 0.3, 0.0, 1.0).unwrap();
        assert!(survival_from_propagators(&s, 0.5, 0.0).is_err());
    }
}
