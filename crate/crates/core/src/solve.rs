//! Scalar root bracketing for threshold searches.

use crate::{Error, Result};

/// Find a root of `f` in `[lo, hi]` by bisection.
///
/// Requires a sign change over the bracket. Runs a fixed 200 iterations,
/// which contracts the bracket by 2^200: far below any tolerance we quote,
/// so callers get bit-stable results independent of their tolerance.
pub fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    let lo_positive = flo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn endpoint_roots_returned() {
        assert_eq!(bisect(|x| x, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(bisect(|x| x - 1.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn converges_to_machine_precision() {
        let r = bisect(|x| x.cos() - x, 0.0, 1.0).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }
}
