//! Small fixed-step numerics: classical RK4 with Richardson step selection
//! and adaptive Simpson quadrature.
//!
//! The profile and generating-curve ODEs are smooth scalar problems; a
//! fixed step chosen once by Richardson halving keeps every later
//! evaluation deterministic, which the verification reports rely on.

use crate::error::{GeometryError, Result};

/// One classical RK4 step for y' = f(t, y).
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let add = |a: [f64; N], b: [f64; N], s: f64| {
        let mut out = a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, &y);
    let k2 = f(t + 0.5 * h, &add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, k2, 0.5 * h));
    let k4 = f(t + h, &add(y, k3, h));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrate from t0 to t1 (either direction) with uniform steps of size
/// at most `h_max`, checking `valid` after every step. On a validity
/// failure the integration stops and the offending t is reported.
pub fn integrate<const N: usize, F, V>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    h_max: f64,
    valid: &V,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    V: Fn(f64, &[f64; N]) -> Option<String>,
{
    let len = t1 - t0;
    if len == 0.0 {
        return Ok(y0);
    }
    let n = (len.abs() / h_max).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..n {
        y = rk4_step(f, t, y, h);
        t += h;
        if !y.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::StallError { at: t, what: "state became non-finite".into() });
        }
        if let Some(what) = valid(t, &y) {
            return Err(GeometryError::StallError { at: t, what });
        }
    }
    Ok(y)
}

/// Choose a step by Richardson halving: halve until two consecutive
/// whole-interval integrations agree at the endpoint to `target`
/// (absolute, relative to the state scale). Returns the accepted step.
pub fn select_step<const N: usize, F, V>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    target: f64,
    valid: &V,
) -> Result<f64>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    V: Fn(f64, &[f64; N]) -> Option<String>,
{
    let len = (t1 - t0).abs();
    if len == 0.0 {
        return Ok(1.0);
    }
    let mut h = len / 64.0;
    let mut prev = integrate(f, t0, y0, t1, h, valid)?;
    for _ in 0..14 {
        h *= 0.5;
        let next = integrate(f, t0, y0, t1, h, valid)?;
        let scale = next.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let diff = prev
            .iter()
            .zip(next.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= target * scale {
            return Ok(h);
        }
        prev = next;
    }
    Ok(h)
}

/// Adaptive Simpson quadrature with the usual 1/15 Richardson error
/// estimate. `tol` is relative to the accumulated magnitude.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    let eps = tol * whole.abs().max(1.0);
    recurse(f, a, b, fa, fm, fb, whole, eps, 40)
}
