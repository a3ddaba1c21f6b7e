//! Reference quadratures that share no code with the exhaustion engine.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("adaptive Simpson exceeded depth {depth} near x = {x}")]
    DepthExceeded { depth: u32, x: f64 },
    #[error("non-finite sample f({x}) = {value}")]
    NonFinite { x: f64, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub const DEFAULT_MAX_DEPTH: u32 = 50;

struct Simpson<'a, F> {
    f: &'a F,
    max_depth: u32,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    fn sample(&self, x: f64) -> Result<f64, OracleError> {
        let value = (self.f)(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(OracleError::NonFinite { x, value })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, OracleError> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.sample(lm)?, self.sample(rm)?);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth {
            return Err(OracleError::DepthExceeded { depth, x: m });
        }
        Ok(self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn oracle_adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> f64,
{
    adaptive_simpson_with_depth(f, a, b, tol, DEFAULT_MAX_DEPTH)
}

pub fn adaptive_simpson_with_depth<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64, OracleError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(OracleError::InvalidArgument(format!(
            "need finite bounds and tol > 0, got [{a}, {b}], tol {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let s = Simpson { f: &f, max_depth };
    let (fa, fb) = (s.sample(a)?, s.sample(b)?);
    let m = 0.5 * (a + b);
    let fm = s.sample(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    s.recurse(a, b, fa, fm, fb, whole, tol, 0)
}

/// Composite midpoint rule with `panels` panels (`panels` evaluations).
pub fn composite_midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        sum += f(a + (i as f64 + 0.5) * h);
    }
    sum * h
}

/// Composite trapezoid rule with `panels` panels (`panels + 1` evaluations).
pub fn composite_trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Composite Simpson rule; `panels` must be even (`panels + 1` evaluations).
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0, "Simpson needs an even panel count");
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
