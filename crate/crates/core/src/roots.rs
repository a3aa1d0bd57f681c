//! Bracketing root finder for smooth scalar equations.
//!
//! Each iteration bisects the bracket and then tries one secant step between
//! the new endpoints, keeping whichever sub-bracket still changes sign. The
//! bracket at least halves every iteration, and near a simple root the secant
//! step gives superlinear convergence.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-13, 1e-300)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("function is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {iterations} iterations (best x = {best})")]
    MaxIterations { iterations: usize, best: f64 },
    #[error("could not bracket a root below {limit}")]
    BracketNotFound { limit: f64 },
}

/// Finds a root of `f` inside `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance, max_iter: usize) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = eval(&mut f, a)?;
    let mut fb = eval(&mut f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    for _ in 0..max_iter {
        if converged(a, b, tol) {
            return Ok(pick(a, fa, b, fb));
        }

        let m = 0.5 * (a + b);
        let fm = eval(&mut f, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        if converged(a, b, tol) {
            return Ok(pick(a, fa, b, fb));
        }

        let s = b - fb * (b - a) / (fb - fa);
        if s > a && s < b && s.is_finite() {
            let fs = eval(&mut f, s)?;
            if fs == 0.0 {
                return Ok(s);
            }
            if fs.signum() == fa.signum() {
                a = s;
                fa = fs;
            } else {
                b = s;
                fb = fs;
            }
        }
    }
    if converged(a, b, tol) {
        Ok(pick(a, fa, b, fb))
    } else {
        Err(RootError::MaxIterations {
            iterations: max_iter,
            best: pick(a, fa, b, fb),
        })
    }
}

/// Grows `hi` geometrically from `start` until `f(hi)` changes sign relative to
/// `f(lo)`, then returns the bracket `(lo, hi)` with the last sub-interval.
pub fn expand_upper<F>(mut f: F, lo: f64, start: f64, factor: f64, limit: f64) -> Result<(f64, f64), RootError>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = eval(&mut f, lo)?;
    let mut prev = lo;
    let mut hi = start.max(lo);
    while hi <= limit {
        let f_hi = eval(&mut f, hi)?;
        if f_hi == 0.0 || f_hi.signum() != f_lo.signum() {
            return Ok((prev, hi));
        }
        prev = hi;
        hi *= factor;
    }
    Err(RootError::BracketNotFound { limit })
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64, RootError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(RootError::NonFinite { x })
    }
}

fn converged(a: f64, b: f64, tol: Tolerance) -> bool {
    (b - a).abs() <= tol.rel * a.abs().max(b.abs()) + tol.abs
}

fn pick(a: f64, fa: f64, b: f64, fb: f64) -> f64 {
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}
