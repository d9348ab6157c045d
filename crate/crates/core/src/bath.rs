//! Reference two-level atom coupled to an equispaced bath of 2N+1 atoms.
//!
//! In the single-excitation subspace the interaction-picture amplitudes obey
//!
//! ```text
//! da0/dt  = -i H Σ_n a_n e^{-i n dE t}
//! da_n/dt = -i H a0 e^{+i n dE t},      n = -N..=N
//! ```
//!
//! with `a0(0) = 1`, `a_n(0) = 0`. The phases are recomputed at every RK4
//! stage time, so the only discretization error is that of the classical
//! fourth-order scheme.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::qcore::exp_m1;

/// Upper bound on `dt·(N·dE + H·√N)`.
pub const STABILITY_LIMIT: f64 = 0.1;
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-6;
/// Smallest |a0| whose logarithm is fitted.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathModel {
    n_levels: usize,
    delta_e: f64,
    coupling: f64,
}

impl BathModel {
    /// `n_levels` is N (the bath holds 2N+1 atoms), `delta_e` the level
    /// spacing and `coupling` the uniform real coupling H.
    ///
    /// `coupling = 0` is accepted as the decoupled reference case.
    pub fn new(n_levels: usize, delta_e: f64, coupling: f64) -> Result<Self> {
        if n_levels < 1 {
            return Err(domain("n_levels", "bath needs N >= 1"));
        }
        if !(delta_e.is_finite() && delta_e > 0.0) {
            return Err(domain("delta_e", format!("level spacing must be positive, got {delta_e}")));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(domain("coupling", format!("coupling must be non-negative, got {coupling}")));
        }
        Ok(Self { n_levels, delta_e, coupling })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn bath_size(&self) -> usize {
        2 * self.n_levels + 1
    }

    /// `E_n - E_0` for `n` in `-N..=N`.
    pub fn level_energy(&self, n: i64) -> Option<f64> {
        (n.unsigned_abs() as usize <= self.n_levels).then_some(n as f64 * self.delta_e)
    }

    /// Golden-rule amplitude decay rate `πH²/dE` of the continuum limit.
    pub fn golden_rule_rate(&self) -> f64 {
        PI * self.coupling * self.coupling / self.delta_e
    }

    /// `N·dE + H·√N`, the fastest rate the integrator has to resolve.
    pub fn stiffness(&self) -> f64 {
        let n = self.n_levels as f64;
        n * self.delta_e + self.coupling * n.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Keep every `stride`-th step (the final step is always kept).
    pub stride: usize,
    /// Skip the step-size stability check.
    pub force: bool,
    pub norm_tolerance: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { stride: 1, force: false, norm_tolerance: DEFAULT_NORM_TOLERANCE }
    }
}

/// Sampled amplitudes `a0(t)` and, for integrated runs, `a_n(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    n_levels: usize,
    times: Vec<f64>,
    a0: Vec<Complex64>,
    /// Row-major, one row of 2N+1 amplitudes per stored time; empty for
    /// trajectories built from `a0` alone.
    bath: Vec<Complex64>,
    norms: Vec<f64>,
}

impl AmplitudeTrajectory {
    /// Trajectory carrying only the reference amplitude, e.g. synthetic data
    /// for [`fit_decay`]. Times must be strictly increasing.
    pub fn from_reference(times: Vec<f64>, a0: Vec<Complex64>) -> Result<Self> {
        if times.len() != a0.len() {
            return Err(domain("trajectory", "times and amplitudes differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("trajectory", "times must be strictly increasing"));
        }
        let norms = a0.iter().map(|a| a.norm_sqr()).collect();
        Ok(Self { n_levels: 0, times, a0, bath: Vec::new(), norms })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn a0(&self) -> &[Complex64] {
        &self.a0
    }

    /// `|a0|² + Σ|a_n|²` at each stored time.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn has_bath(&self) -> bool {
        !self.bath.is_empty()
    }

    /// All bath amplitudes at stored index `k`, ordered `n = -N..=N`.
    pub fn bath_row(&self, k: usize) -> Option<&[Complex64]> {
        if !self.has_bath() || k >= self.len() {
            return None;
        }
        let width = 2 * self.n_levels + 1;
        Some(&self.bath[k * width..(k + 1) * width])
    }

    pub fn bath_amplitude(&self, k: usize, n: i64) -> Option<Complex64> {
        let row = self.bath_row(k)?;
        let idx = n + self.n_levels as i64;
        (0..row.len() as i64).contains(&idx).then(|| row[idx as usize])
    }

    /// Largest `|norm - 1|` over the stored samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Right-hand side; returns `da0/dt` and writes `da_n/dt` into `out`.
fn derivative(
    model: &BathModel,
    t: f64,
    a0: Complex64,
    bath: &[Complex64],
    phases: &mut [Complex64],
    out: &mut [Complex64],
) -> Complex64 {
    let n_max = model.n_levels;
    let minus_i_h = Complex64::new(0.0, -model.coupling);
    phases[n_max] = Complex64::new(1.0, 0.0);
    for n in 1..=n_max {
        let p = Complex64::cis(n as f64 * model.delta_e * t);
        phases[n_max + n] = p;
        phases[n_max - n] = p.conj();
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (a, p) in bath.iter().zip(phases.iter()) {
        sum += a * p.conj();
    }
    let drive = minus_i_h * a0;
    for (o, p) in out.iter_mut().zip(phases.iter()) {
        *o = drive * p;
    }
    minus_i_h * sum
}

fn total_norm(a0: Complex64, bath: &[Complex64]) -> f64 {
    a0.norm_sqr() + bath.iter().map(|a| a.norm_sqr()).sum::<f64>()
}

/// Integrates the coupled amplitude equations on `[0, t_max]` with default
/// options (every step stored, stability check on, norm tolerance 1e-6).
pub fn integrate_bath(model: &BathModel, t_max: f64, dt: f64) -> Result<AmplitudeTrajectory> {
    integrate_bath_with(model, t_max, dt, IntegrationOptions::default())
}

/// Fixed-step RK4 on `[0, t_max]`. The step actually used is
/// `t_max / ceil(t_max / dt)`, never larger than `dt`.
pub fn integrate_bath_with(
    model: &BathModel,
    t_max: f64,
    dt: f64,
    opts: IntegrationOptions,
) -> Result<AmplitudeTrajectory> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(domain("t_max", format!("must be positive, got {t_max}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(domain("dt", format!("must be positive, got {dt}")));
    }
    if opts.stride == 0 {
        return Err(domain("stride", "must be at least 1"));
    }
    let measure = dt * model.stiffness();
    if !opts.force && measure >= STABILITY_LIMIT {
        return Err(Error::StepTooLarge { dt, measure });
    }

    let steps = ((t_max / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_max / steps as f64;
    let width = model.bath_size();
    let stored = steps / opts.stride + 2;

    let mut traj = AmplitudeTrajectory {
        n_levels: model.n_levels,
        times: Vec::with_capacity(stored),
        a0: Vec::with_capacity(stored),
        bath: Vec::with_capacity(stored * width),
        norms: Vec::with_capacity(stored),
    };

    let mut a0 = Complex64::new(1.0, 0.0);
    let mut bath = vec![Complex64::new(0.0, 0.0); width];
    let mut phases = vec![Complex64::new(0.0, 0.0); width];
    let mut stage = vec![Complex64::new(0.0, 0.0); width];
    let mut k = [
        vec![Complex64::new(0.0, 0.0); width],
        vec![Complex64::new(0.0, 0.0); width],
        vec![Complex64::new(0.0, 0.0); width],
        vec![Complex64::new(0.0, 0.0); width],
    ];

    let record = |traj: &mut AmplitudeTrajectory, t: f64, a0: Complex64, bath: &[Complex64]| -> Result<()> {
        let norm = total_norm(a0, bath);
        let drift = (norm - 1.0).abs();
        if !(drift <= opts.norm_tolerance) {
            return Err(Error::NormDriftExceeded { t, drift, tol: opts.norm_tolerance });
        }
        traj.times.push(t);
        traj.a0.push(a0);
        traj.bath.extend_from_slice(bath);
        traj.norms.push(norm);
        Ok(())
    };

    record(&mut traj, 0.0, a0, &bath)?;
    let half = 0.5 * h;
    for step in 0..steps {
        let t = step as f64 * h;
        let [k1, k2, k3, k4] = &mut k;

        let d1 = derivative(model, t, a0, &bath, &mut phases, k1);

        for ((s, b), d) in stage.iter_mut().zip(&bath).zip(k1.iter()) {
            *s = b + d * half;
        }
        let d2 = derivative(model, t + half, a0 + d1 * half, &stage, &mut phases, k2);

        for ((s, b), d) in stage.iter_mut().zip(&bath).zip(k2.iter()) {
            *s = b + d * half;
        }
        let d3 = derivative(model, t + half, a0 + d2 * half, &stage, &mut phases, k3);

        for ((s, b), d) in stage.iter_mut().zip(&bath).zip(k3.iter()) {
            *s = b + d * h;
        }
        let d4 = derivative(model, t + h, a0 + d3 * h, &stage, &mut phases, k4);

        let sixth = h / 6.0;
        a0 += (d1 + 2.0 * d2 + 2.0 * d3 + d4) * sixth;
        for (j, b) in bath.iter_mut().enumerate() {
            *b += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * sixth;
        }

        let done = step + 1;
        if done % opts.stride == 0 || done == steps {
            record(&mut traj, done as f64 * h, a0, &bath)?;
        }
    }
    Ok(traj)
}

/// Exponential fit `|a0(t)| ≈ C e^{-γt}` over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the straight-line fit to `ln|a0|`.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares slope of `ln|a0(t)|` over the stored samples in `window`.
pub fn fit_decay(traj: &AmplitudeTrajectory, window: (f64, f64)) -> Result<DecayFit> {
    let (start, end) = window;
    let out_of_range = Error::WindowOutOfRange { start, end };
    let (Some(&first), Some(&last)) = (traj.times.first(), traj.times.last()) else {
        return Err(out_of_range);
    };
    if !(start < end && start >= first && end <= last) {
        return Err(out_of_range);
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, a) in traj.times.iter().zip(&traj.a0) {
        if t < start || t > end {
            continue;
        }
        let m = a.norm();
        if !(m > AMPLITUDE_FLOOR) {
            return Err(Error::AmplitudeUnderflow { t, value: m });
        }
        xs.push(t);
        ys.push(m.ln());
    }
    if xs.len() < 2 {
        return Err(out_of_range);
    }

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();

    let gamma = -slope;
    if !(gamma > 0.0) {
        return Err(Error::NonDecaying(gamma));
    }
    Ok(DecayFit { gamma, fit_window: window, residual, samples: xs.len() })
}

/// Continuum-limit propagator column `U_n0(t)`:
/// `U_00 = e^{-γt}`, `U_n0 = iH (e^{(-γ + i n dE) t} - 1) / (γ - i n dE)`.
///
/// Index 0 is the reference atom here; the resonant bath level has no index
/// of its own. Use [`closed_form_bath_amplitude`] for bath levels.
pub fn closed_form_propagator(n: i64, coupling: f64, gamma: f64, delta_e: f64, t: f64) -> Result<Complex64> {
    let a = closed_form_bath_amplitude(n, coupling, gamma, delta_e, t)?;
    if n == 0 {
        return Ok(Complex64::new((-gamma * t).exp(), 0.0));
    }
    Ok(a)
}

/// Continuum-limit amplitude of bath level `n ∈ [-N, N]`, resonant `n = 0`
/// included: `iH (e^{(-γ + i n dE) t} - 1) / (γ - i n dE)`.
pub fn closed_form_bath_amplitude(n: i64, coupling: f64, gamma: f64, delta_e: f64, t: f64) -> Result<Complex64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(domain("gamma", format!("decay constant must be positive, got {gamma}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain("t", format!("propagator needs t >= 0, got {t}")));
    }
    if !(coupling.is_finite() && delta_e.is_finite()) {
        return Err(domain("closed_form_propagator", "non-finite parameter"));
    }
    let rate = Complex64::new(-gamma, n as f64 * delta_e);
    Ok(Complex64::new(0.0, coupling) * exp_m1(rate * t) / (-rate))
}
