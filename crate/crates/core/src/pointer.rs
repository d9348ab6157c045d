//! Impulsive von Neumann measurement with a Gaussian pointer.
//!
//! The interaction `g·P·A` translates the pointer by `g·a_k` on each
//! eigenspace of `A`. Translation is done in momentum space
//! (`Φ(Q - s) = F⁻¹[e^{-ips} F[Φ]]`), so it is exact for band-limited
//! wavefunctions on the periodic extension of the grid. Position moments use
//! the trapezoidal rule and the momentum moment the spectral derivative.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::qcore::{Operator2, SpinState};

/// Half-width of the pointer support in units of Δ.
pub const SUPPORT_WIDTHS: f64 = 8.0;
pub const MIN_GRID_POINTS: usize = 64;
/// Below this squared norm a wavefunction carries no usable signal.
pub const NORM_FLOOR: f64 = 1e-14;

/// Uniform grid `q_j = q_min + j·dq`, `j = 0..n_points`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerGrid {
    q_min: f64,
    q_max: f64,
    n_points: usize,
}

impl PointerGrid {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if !(q_max > q_min) {
            return Err(Error::InvalidGrid(format!("q_max = {q_max} must exceed q_min = {q_min}")));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!("n_points = {n_points} below minimum {MIN_GRID_POINTS}")));
        }
        Ok(Self { q_min, q_max, n_points })
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Same bounds, twice the resolution (`2n - 1` points keeps every old node).
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, ..*self }
    }

    /// Angular wavenumber of FFT bin `j`.
    fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n_points;
        let signed = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
        2.0 * PI * signed / (n as f64 * self.spacing())
    }

    fn trapezoid<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        let last = self.n_points - 1;
        let mut sum = 0.0;
        for (j, v) in values.into_iter().enumerate() {
            sum += if j == 0 || j == last { 0.5 * v } else { v };
        }
        sum * self.spacing()
    }
}

/// Complex pointer amplitudes sampled on a [`PointerGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointerWavefunction {
    grid: PointerGrid,
    amplitudes: Vec<Complex64>,
    delta: f64,
}

impl PointerWavefunction {
    /// Wraps raw samples; `delta` records the nominal width used for support checks.
    pub fn from_samples(grid: PointerGrid, amplitudes: Vec<Complex64>, delta: f64) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::InvalidGrid(format!("{} samples for a {}-point grid", amplitudes.len(), grid.n_points)));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(domain("pointer", "non-finite amplitude"));
        }
        Ok(Self { grid, amplitudes, delta })
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(q, Φ(q))` pairs in grid order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.grid.points().zip(self.amplitudes.iter().copied())
    }

    /// `∫|Φ|² dQ` (trapezoidal).
    pub fn norm_sqr(&self) -> f64 {
        self.grid.trapezoid(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > NORM_FLOOR) {
            return Err(Error::DegenerateWavefunction(n2));
        }
        let scale = 1.0 / n2.sqrt();
        Ok(Self { amplitudes: self.amplitudes.iter().map(|a| a * scale).collect(), ..self.clone() })
    }

    /// Multiplies by `e^{ikQ}` (momentum boost by `k`).
    pub fn boosted(&self, k: f64) -> Self {
        let amplitudes = self.samples().map(|(q, a)| a * Complex64::cis(k * q)).collect();
        Self { amplitudes, ..self.clone() }
    }

    /// `Φ(Q - shift)`, computed spectrally.
    pub fn translated(&self, shift: f64) -> Self {
        let grid = self.grid;
        let amplitudes = spectral_map(&self.amplitudes, |j| Complex64::cis(-grid.wavenumber(j) * shift));
        Self { amplitudes, ..self.clone() }
    }

    /// `∂Φ/∂Q` by spectral differentiation (Nyquist bin dropped for even sizes).
    pub fn derivative(&self) -> Vec<Complex64> {
        let grid = self.grid;
        let n = grid.n_points;
        spectral_map(&self.amplitudes, |j| {
            if n.is_multiple_of(2) && j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.wavenumber(j))
            }
        })
    }

    /// Position variance of the normalized density.
    pub fn position_variance(&self) -> Result<f64> {
        let (mean_q, _) = pointer_moments(self)?;
        let n2 = self.norm_sqr();
        let second = self.grid.trapezoid(self.samples().map(|(q, a)| (q - mean_q) * (q - mean_q) * a.norm_sqr()));
        Ok(second / n2)
    }
}

/// Applies a diagonal multiplier in FFT space: `F⁻¹[m_j · F[x]_j]`.
fn spectral_map<M: Fn(usize) -> Complex64>(x: &[Complex64], multiplier: M) -> Vec<Complex64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft(n, FftDirection::Forward);
    let inverse = planner.plan_fft(n, FftDirection::Inverse);
    let mut buf = x.to_vec();
    forward.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for (j, b) in buf.iter_mut().enumerate() {
        *b *= multiplier(j) * inv_n;
    }
    inverse.process(&mut buf);
    buf
}

/// Normalized Gaussian `(Δ²π)^{-1/4} e^{-Q²/2Δ²}` on `grid`.
pub fn gaussian_pointer(grid: PointerGrid, delta: f64) -> Result<PointerWavefunction> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(domain("delta", format!("pointer width must be positive, got {delta}")));
    }
    let half = SUPPORT_WIDTHS * delta;
    if grid.q_min > -half || grid.q_max < half {
        return Err(Error::GridTooNarrow { q_min: grid.q_min, q_max: grid.q_max, need_min: -half, need_max: half });
    }
    let prefactor = (delta * delta * PI).powf(-0.25);
    let amplitudes =
        grid.points().map(|q| Complex64::new(prefactor * (-q * q / (2.0 * delta * delta)).exp(), 0.0)).collect();
    PointerWavefunction { grid, amplitudes, delta }.normalized()
}

/// `(⟨Q⟩, ⟨P⟩)` of the renormalized wavefunction, ħ = 1.
pub fn pointer_moments(wf: &PointerWavefunction) -> Result<(f64, f64)> {
    let n2 = wf.norm_sqr();
    if !(n2 > NORM_FLOOR) {
        return Err(Error::DegenerateWavefunction(n2));
    }
    let mean_q = wf.grid.trapezoid(wf.samples().map(|(q, a)| q * a.norm_sqr())) / n2;
    let dphi = wf.derivative();
    let mean_p = wf.grid.trapezoid(wf.amplitudes.iter().zip(&dphi).map(|(a, d)| (a.conj() * d).im)) / n2;
    Ok((mean_q, mean_p))
}

/// Result of one pre/post-selected pointer measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// Post-selected pointer, not renormalized; its squared norm is the
    /// post-selection probability.
    pub final_pointer: PointerWavefunction,
    pub mean_q: f64,
    pub mean_p: f64,
    pub post_selection_probability: f64,
}

impl MeasurementOutcome {
    pub fn renormalized_pointer(&self) -> Result<PointerWavefunction> {
        self.final_pointer.normalized()
    }
}

/// Couples `op` to the pointer with strength `coupling`, post-selects on
/// `post`, and reads out the pointer moments.
///
/// The final pointer is `Σ_k ⟨post|a_k⟩⟨a_k|pre⟩ Φ(Q - g·a_k)`.
pub fn weak_measure(
    pre: &SpinState,
    post: &SpinState,
    op: &Operator2,
    coupling: f64,
    pointer: &PointerWavefunction,
) -> Result<MeasurementOutcome> {
    if !coupling.is_finite() {
        return Err(domain("coupling", "must be finite"));
    }
    let (eigenvalues, eigenvectors) = op.eigh()?;
    let input_norm = pointer.norm_sqr();
    let (center, _) = pointer_moments(pointer)?;

    let grid = *pointer.grid();
    let half = SUPPORT_WIDTHS * pointer.delta();
    let shifts = eigenvalues.map(|a| coupling * a);
    let lo = shifts.iter().cloned().fold(f64::INFINITY, f64::min) + center - half;
    let hi = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + center + half;
    if grid.q_min() > lo || grid.q_max() < hi {
        return Err(Error::GridTooNarrow { q_min: grid.q_min(), q_max: grid.q_max(), need_min: lo, need_max: hi });
    }

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.n_points()];
    for (shift, vector) in shifts.iter().zip(&eigenvectors) {
        let weight = post.inner(vector) * vector.inner(pre);
        if weight == Complex64::new(0.0, 0.0) {
            continue;
        }
        let moved = pointer.translated(*shift);
        for (acc, a) in amplitudes.iter_mut().zip(moved.amplitudes()) {
            *acc += weight * a;
        }
    }
    let final_pointer = PointerWavefunction::from_samples(grid, amplitudes, pointer.delta())?;

    let weight = final_pointer.norm_sqr() / input_norm;
    if !(weight >= NORM_FLOOR) {
        return Err(Error::NearOrthogonalPostSelection { overlap: weight.sqrt() });
    }
    let (mean_q, mean_p) = pointer_moments(&final_pointer)?;
    Ok(MeasurementOutcome { final_pointer, mean_q, mean_p, post_selection_probability: weight.clamp(0.0, 1.0) })
}
