//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, eps: f64, depth: u32, max_depth: u32) -> Result<f64> {
    let Panel { a, m, b, fa, fm, fb, whole } = p;
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;

    if !delta.is_finite() {
        return Err(Error::QuadratureNonConvergence { a, b, depth });
    }
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    // Panel collapsed to adjacent floats or depth budget spent.
    if depth >= max_depth || !(a < lm && lm < m && m < rm && rm < b) {
        return Err(Error::QuadratureNonConvergence { a, b, depth });
    }
    let l = Panel { a, m: lm, b: m, fa, fm: flm, fb: fm, whole: left };
    let r = Panel { a: m, m: rm, b, fa: fm, fm: frm, fb, whole: right };
    Ok(refine(f, l, 0.5 * eps, depth + 1, max_depth)? + refine(f, r, 0.5 * eps, depth + 1, max_depth)?)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::QuadratureNonConvergence`] when some panel still misses
/// its share of the tolerance after `max_depth` bisections.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, tol, max_depth).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    refine(&f, Panel { a, m, b, fa, fm, fb, whole }, tol, 0, max_depth)
}

/// Same as [`adaptive_simpson`] with the crate defaults (`1e-10`, depth 40).
pub fn integrate<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    adaptive_simpson(f, a, b, DEFAULT_TOLERANCE, DEFAULT_MAX_DEPTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let v = integrate(|x| 1.0 + x - 2.0 * x * x + x * x * x, 0.0, 2.0).unwrap();
        assert!((v - (2.0 + 2.0 - 16.0 / 3.0 + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn smooth_transcendental() {
        assert!((integrate(f64::sin, 0.0, PI).unwrap() - 2.0).abs() < 1e-10);
        assert!((integrate(|x| (-x).exp(), 0.0, 50.0).unwrap() - (1.0 - (-50.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(f64::cos, 0.0, 1.0).unwrap();
        let back = integrate(f64::cos, 1.0, 0.0).unwrap();
        assert!((fwd + back).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_fails_fast() {
        let r = integrate(|x| if x > 0.3 { f64::NAN } else { x }, 0.0, 1.0);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { depth: 0, .. })));
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = adaptive_simpson(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 6);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
