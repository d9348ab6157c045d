//! Two-level state and operator algebra.
//!
//! Everything here works on a fixed basis `{|up⟩, |down⟩}` (σ_z eigenbasis,
//! `|up⟩` = excited). Operators are plain 2×2 complex matrices stored row-major.
//! The weak-value kernels accept arbitrary propagators so the same code serves
//! the unitary precession, the finite-bath closed forms and the retarded
//! (non-unitary) evolution.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type ComplexScalar = Complex64;

/// Smallest admissible |⟨post|pre⟩| relative to the state norms.
pub const OVERLAP_EPSILON: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A raw (not necessarily normalized) two-component vector.
pub type Spinor = [Complex64; 2];

/// Normalized spin-1/2 state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    up: Complex64,
    down: Complex64,
}

impl SpinState {
    /// Normalizes `(up, down)`; fails on a zero or non-finite vector.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(domain("SpinState", "non-finite component"));
        }
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { up: up / norm, down: down / norm })
    }

    pub fn from_spinor(v: Spinor) -> Result<Self> {
        Self::new(v[0], v[1])
    }

    pub fn z_plus() -> Self {
        Self { up: ONE, down: ZERO }
    }

    pub fn z_minus() -> Self {
        Self { up: ZERO, down: ONE }
    }

    pub fn x_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { up: Complex64::new(s, 0.0), down: Complex64::new(s, 0.0) }
    }

    pub fn x_minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { up: Complex64::new(s, 0.0), down: Complex64::new(-s, 0.0) }
    }

    pub fn y_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { up: Complex64::new(s, 0.0), down: Complex64::new(0.0, s) }
    }

    pub fn y_minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { up: Complex64::new(s, 0.0), down: Complex64::new(0.0, -s) }
    }

    /// `cos(theta)|up⟩ + e^{i phi} sin(theta)|down⟩`.
    ///
    /// Note the angle is *not* halved: `theta = π/4, phi = 0` gives `|x+⟩`.
    pub fn superposition(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(domain("SpinState::superposition", "non-finite angle"));
        }
        Self::new(Complex64::new(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phi))
    }

    pub fn up(&self) -> Complex64 {
        self.up
    }

    pub fn down(&self) -> Complex64 {
        self.down
    }

    pub fn spinor(&self) -> Spinor {
        [self.up, self.down]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinState) -> Complex64 {
        inner(&self.spinor(), &other.spinor())
    }
}

/// `⟨a|b⟩` for raw spinors.
pub fn inner(a: &Spinor, b: &Spinor) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn spinor_norm(v: &Spinor) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn exp_m1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    // e^x cos y - 1 = expm1(x) cos y + (cos y - 1), with cos y - 1 = -2 sin²(y/2)
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin, x.exp() * y.sin())
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn from_rows(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// Hermitian matrix `[[a, b], [b*, d]]`; equals its adjoint bit for bit.
    pub fn hermitian(a: f64, b: Complex64, d: f64) -> Self {
        Self::new(Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0))
    }

    pub fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    /// `|s⟩⟨s|`.
    pub fn projector(s: &SpinState) -> Self {
        let (u, d) = (s.up(), s.down());
        Self::hermitian(u.norm_sqr(), u * d.conj(), d.norm_sqr())
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn rows(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.m;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn apply_state(&self, s: &SpinState) -> Spinor {
        self.apply(&s.spinor())
    }

    /// `⟨bra|self|ket⟩`.
    pub fn matrix_element(&self, bra: &Spinor, ket: &Spinor) -> Complex64 {
        inner(bra, &self.apply(ket))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.m;
        (m[0][0].im).abs() <= tol && (m[1][1].im).abs() <= tol && (m[0][1] - m[1][0].conj()).norm() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Spectral decomposition of a Hermitian operator.
    ///
    /// Returns eigenvalues in descending order with matching normalized
    /// eigenvectors.
    pub fn eigh(&self) -> Result<([f64; 2], [SpinState; 2])> {
        if !self.is_hermitian(1e-12) {
            return Err(Error::NonHermitianOperator);
        }
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = self.m[0][1];
        if b == ZERO {
            return Ok(if a >= d {
                ([a, d], [SpinState::z_plus(), SpinState::z_minus()])
            } else {
                ([d, a], [SpinState::z_minus(), SpinState::z_plus()])
            });
        }
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let vals = [mean + radius, mean - radius];
        let vec_for = |lambda: f64| -> Result<SpinState> {
            // Both rows of (A - λ) give a null vector; keep the better conditioned one.
            let v1 = [b, Complex64::new(lambda - a, 0.0)];
            let v2 = [Complex64::new(lambda - d, 0.0), b.conj()];
            let v = if spinor_norm(&v1) >= spinor_norm(&v2) { v1 } else { v2 };
            SpinState::from_spinor(v)
        };
        Ok((vals, [vec_for(vals[0])?, vec_for(vals[1])?]))
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.m, &rhs.m);
        Operator2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Operator2;
    fn neg(self) -> Operator2 {
        self * Complex64::new(-1.0, 0.0)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.m, &rhs.m);
        Operator2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Complex64> for Operator2 {
    type Output = Operator2;
    fn mul(self, s: Complex64) -> Operator2 {
        let a = &self.m;
        Operator2::new(a[0][0] * s, a[0][1] * s, a[1][0] * s, a[1][1] * s)
    }
}

/// Bare precession frequency ω (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecessionParams {
    pub omega: f64,
}

impl PrecessionParams {
    pub fn new(omega: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(domain("omega", "must be finite"));
        }
        Ok(Self { omega })
    }
}

/// `U(t) = diag(e^{iωt/2}, e^{-iωt/2})`.
///
/// The phase convention fixes the effective Hamiltonian to `-(ω/2)σ_z`; the
/// group property `U(a)U(b) = U(a+b)` holds for any real arguments.
pub fn precession_unitary(params: PrecessionParams, t: f64) -> Operator2 {
    let phase = 0.5 * params.omega * t;
    Operator2::diag(Complex64::cis(phase), Complex64::cis(-phase))
}

fn checked_ratio(numerator: Complex64, denominator: Complex64, scale: f64) -> Result<Complex64> {
    if !(denominator.norm() > OVERLAP_EPSILON * scale) {
        return Err(Error::NearOrthogonalPostSelection { overlap: denominator.norm() });
    }
    Ok(numerator / denominator)
}

/// `⟨post|op|pre⟩ / ⟨post|pre⟩`.
pub fn weak_value(pre: &SpinState, post: &SpinState, op: &Operator2) -> Result<Complex64> {
    let (bra, ket) = (post.spinor(), pre.spinor());
    checked_ratio(op.matrix_element(&bra, &ket), inner(&bra, &ket), 1.0)
}

/// Weak value of `op` at an intermediate time `t`, pre-selected at `t_i` and
/// post-selected at `t_f`:
///
/// `⟨post|U(t_f - t) op U(t - t_i)|pre⟩ / ⟨post|U(t_f - t_i)|pre⟩`
///
/// `evolve(τ)` must return the propagator over an interval `τ ≥ 0` with
/// `evolve(0) = I`; it need not be unitary.
pub fn time_dependent_weak_value<F>(
    pre: &SpinState,
    post: &SpinState,
    op: &Operator2,
    t_i: f64,
    t: f64,
    t_f: f64,
    evolve: F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Operator2,
{
    if !(t_i.is_finite() && t.is_finite() && t_f.is_finite()) {
        return Err(domain("time", "non-finite time"));
    }
    if !(t_i <= t && t <= t_f) {
        return Err(domain("time", format!("t = {t} outside [t_i, t_f] = [{t_i}, {t_f}]")));
    }
    let bra = post.spinor();
    let ket = pre.spinor();

    let forward = evolve(t - t_i).apply(&ket);
    let numerator = inner(&bra, &evolve(t_f - t).apply(&op.apply(&forward)));

    let full = evolve(t_f - t_i).apply(&ket);
    checked_ratio(numerator, inner(&bra, &full), spinor_norm(&full))
}
