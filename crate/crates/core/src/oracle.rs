//! Independent reference implementations used by the test suites to
//! cross-check the closed forms elsewhere in the crate.
//!
//! Everything here is deliberately generic and slow: dense determinants,
//! scans over loading space, and scalar root finding. None of the
//! production paths call into this module.

// Pivoting elimination reads naturally with index loops.
#![allow(clippy::needless_range_loop)]

use crate::numeric::golden_section_min;

/// Determinant of a dense matrix by LU factorization with partial pivoting.
pub fn det_dense(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Inverse of a dense matrix by Gauss-Jordan elimination.
pub fn inverse_dense(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        a.swap(piv, k);
        let p = a[k][k];
        for j in 0..2 * n {
            a[k][j] /= p;
        }
        for i in 0..n {
            if i != k {
                let f = a[i][k];
                for j in 0..2 * n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// `K_y^{-1} + diag(lambda)` inverted densely; returns the error covariance
/// of the loaded test channel without using the structured closed forms.
pub fn loaded_error_cov_dense(rho: f64, lambda: &[f64]) -> Vec<Vec<f64>> {
    let n = lambda.len();
    let ky: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { rho })
                .collect()
        })
        .collect();
    let mut ky_inv = inverse_dense(&ky);
    for (i, l) in lambda.iter().enumerate() {
        ky_inv[i][i] += l;
    }
    inverse_dense(&ky_inv)
}

fn quad_form_dense(m: &[Vec<f64>], v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += v[i] * m[i][j] * v[j];
        }
    }
    acc
}

/// Solves the error-correlation fixed point `theta / (1 - theta^2) =
/// rho sqrt(d1 d2) / (1 - rho^2)` by bisection, avoiding the explicit
/// radical used in production.
pub fn theta_root_bisect(d1: f64, d2: f64, rho: f64) -> f64 {
    let rhs = rho * (d1 * d2).sqrt() / (1.0 - rho * rho);
    let f = |t: f64| t / (1.0 - t * t) - rhs;
    let mut lo = 0.0;
    let mut hi = 1.0 - 1e-15;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimal sum rate `0.5 log2(|K_y| / |D|)` over two-source test channels
/// subject to quadratic constraints `mu_j^T D mu_j <= d_j`, found by a scan
/// over the first loading with the second loading driven to the smallest
/// feasible value by bisection, followed by golden-section refinement.
///
/// This is the brute-force route: it never looks at optimality conditions.
pub fn constrained_sum_rate_grid(rho: f64, constraints: &[([f64; 2], f64)]) -> f64 {
    let rate = |l1: f64, l2: f64| -> f64 {
        let d = loaded_error_cov_dense(rho, &[l1, l2]);
        let ky_det = 1.0 - rho * rho;
        0.5 * (ky_det / det_dense(&d)).log2()
    };
    let feasible = |l1: f64, l2: f64| -> bool {
        let d = loaded_error_cov_dense(rho, &[l1, l2]);
        constraints
            .iter()
            .all(|(mu, cap)| quad_form_dense(&d, mu) <= cap * (1.0 + 1e-12) + 1e-15)
    };
    // Smallest feasible second loading for a given first loading; every
    // quadratic form shrinks monotonically as loading grows, so bisection
    // over an expanding bracket is exact.
    let min_l2 = |l1: f64| -> f64 {
        if feasible(l1, 0.0) {
            return 0.0;
        }
        let mut hi = 1.0;
        while !feasible(l1, hi) {
            hi *= 2.0;
            if hi > 1e14 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(l1, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let value = |log_l1: f64| -> f64 {
        let l1 = log_l1.exp();
        let l2 = min_l2(l1);
        if l2.is_infinite() {
            f64::INFINITY
        } else {
            rate(l1, l2)
        }
    };

    if feasible(0.0, 0.0) {
        return 0.0;
    }
    let (lo, hi, n) = (-21.0f64, 21.0f64, 1200usize);
    let mut best_x = lo;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = value(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // Also consider a vanishing first loading (boundary optimum).
    let l2_at_zero = min_l2(0.0);
    let boundary = if l2_at_zero.is_infinite() {
        f64::INFINITY
    } else {
        rate(0.0, l2_at_zero)
    };
    let step = (hi - lo) / n as f64;
    let xr = golden_section_min(best_x - step, best_x + step, 1e-12, value);
    value(xr).min(best).min(boundary)
}

/// Sum rate of the normalized two-agent CEO program solved numerically in
/// rate space: the coverage constraint pins the second quantization rate to
/// the first, and the scalar objective is minimized by golden section.
pub fn ceo_program_rate(snr1: f64, snr2: f64, gamma: f64, d_norm: f64) -> f64 {
    let k = 1.0 / (d_norm + gamma);
    if k <= 1.0 {
        return 0.0;
    }
    // r2 needed to close the coverage gap left by r1, or 0 if none.
    let r2_of = |r1: f64| -> Option<f64> {
        let t1 = (-2.0 * r1).exp2();
        let need = k - 1.0 - snr1 * (1.0 - t1);
        if need <= 0.0 {
            return Some(0.0);
        }
        let t2 = 1.0 - need / snr2;
        if t2 <= 0.0 {
            None
        } else {
            Some(-0.5 * t2.log2())
        }
    };
    let objective = |r1: f64| -> f64 {
        match r2_of(r1) {
            Some(r2) => 0.5 * k.log2() + r1 + r2,
            None => f64::INFINITY,
        }
    };
    // r1 never needs to exceed the rate that closes coverage single-handedly.
    let r1_cap = {
        let t1 = 1.0 - (k - 1.0) / snr1;
        if t1 <= 0.0 {
            20.0
        } else {
            -0.5 * t1.log2() + 1.0
        }
    };
    let x = golden_section_min(0.0, r1_cap, 1e-13, objective);
    objective(x).min(objective(0.0))
}
