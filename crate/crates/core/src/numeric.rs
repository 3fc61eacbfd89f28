//! Small numeric helpers shared by every bound: clamped logarithms and
//! scalar minimization/root bracketing.

/// `max(log2(x), 0)`, the clamp applied by every rate bound.
#[inline]
pub fn log2_plus(x: f64) -> f64 {
    let v = x.log2();
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// `0.5 * max(log2(x), 0)` in bits per sample.
#[inline]
pub fn half_log2_plus(x: f64) -> f64 {
    0.5 * log2_plus(x)
}

/// Bisection for a continuous function with `f(lo)` and `f(hi)` of opposite
/// sign. Runs until the bracket width drops below `tol`.
pub fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let sign_lo = flo.signum();
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`. Returns the abscissa of the minimum.
pub fn golden_section_min<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo < tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Uniform grid with exact endpoints; built from integer indices so the
/// points are identical regardless of evaluation order.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}
