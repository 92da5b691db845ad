//! Adaptive Simpson quadrature.

use alloc::string::ToString;

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
///
/// Classic adaptive Simpson with Richardson correction; recursion depth is
/// bounded, and exhausting it reports a numeric error instead of returning
/// a silently degraded value.
pub fn adaptive_simpson(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::Domain("integration bounds must satisfy a <= b".to_string()));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // The absolute floor guards integrands that are identically ~0.
    let tol = rel_tol * whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric("adaptive quadrature failed to converge".to_string()));
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let got = adaptive_simpson(&mut |x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((got - 0.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_exponential() {
        let got = adaptive_simpson(&mut |x| x.exp(), 0.0, 1.0, 1e-10).unwrap();
        let want = core::f64::consts::E - 1.0;
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn zero_width_interval() {
        assert_eq!(adaptive_simpson(&mut |x| x, 1.0, 1.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(adaptive_simpson(&mut |x| x, 1.0, 0.0, 1e-8).is_err());
    }
}
