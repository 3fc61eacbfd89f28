//! Symmetric many-source sum rate: equal distortion targets over an
//! exchangeable source force the optimal loading to be a scalar multiple
//! of the identity, collapsing the problem to one dimension. The converse
//! side reuses the cooperative/weighted-sum min-max with the all-ones
//! direction, whose CEO coupling has every agent observing a common
//! hidden variable of variance `rho` through unit-variance noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::MinimaxProfile;
use crate::model::Exchangeable;
use crate::numeric::{half_log2_plus, linspace};

/// An equal-distortion instance over `L` exchangeable sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricInstance {
    rho: f64,
    l: usize,
    d: f64,
}

impl SymmetricInstance {
    pub fn new(rho: f64, l: usize, d: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !rho.is_finite() {
            return Err(Error::InvalidCorrelation { rho });
        }
        if l < 2 {
            return Err(Error::InvalidSourceCount { l });
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidDistortion { value: d });
        }
        Ok(Self { rho, l, d })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn num_sources(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `det K_y = (1 - rho)^(L-1) (1 + (L-1) rho)`.
    pub fn covariance_det(&self) -> f64 {
        Exchangeable::new(self.l, 1.0, self.rho).det()
    }
}

/// Error covariance of the scalar-loaded channel `(K_y^{-1} + lambda I)^{-1}`
/// as `(diag, off)`, from the rank-one update formula.
pub fn scalar_loaded_entries(rho: f64, l: usize, lambda: f64) -> (f64, f64) {
    let lf = l as f64;
    let factor = (1.0 - rho) / (1.0 + lambda * (1.0 - rho));
    let inner = 1.0 - rho + lambda * (1.0 - rho) * (1.0 - rho + rho * lf);
    let off = factor * rho / inner;
    (factor + off, off)
}

/// The unique scalar loading whose error covariance has diagonal `d`,
/// found by bisection on the strictly decreasing diagonal map. Zero when
/// the target is not binding.
pub fn solve_symmetric_lambda(inst: &SymmetricInstance) -> f64 {
    if inst.d >= 1.0 {
        return 0.0;
    }
    let diag = |lambda: f64| scalar_loaded_entries(inst.rho, inst.l, lambda).0;
    let mut hi = 1.0;
    while diag(hi) > inst.d {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if diag(mid) > inst.d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Optimal sum rate for equal distortion targets:
/// `0.5 log2+(|K_y| / |D*|)` with `|D*| = d^L (1-theta)^(L-1) (1+(L-1)theta)`.
pub fn symmetric_sum_rate(inst: &SymmetricInstance) -> f64 {
    if inst.d >= 1.0 {
        return 0.0;
    }
    let theta = symmetric_theta(inst);
    let lf = inst.l as f64;
    let det_d =
        inst.d.powi(inst.l as i32) * (1.0 - theta).powi(inst.l as i32 - 1) * (1.0 + (lf - 1.0) * theta);
    half_log2_plus(inst.covariance_det() / det_d)
}

/// Error correlation of the optimizing covariance; equals `rho` when the
/// target is not binding.
pub fn symmetric_theta(inst: &SymmetricInstance) -> f64 {
    if inst.d >= 1.0 {
        return inst.rho;
    }
    let lambda = solve_symmetric_lambda(inst);
    let (diag, off) = scalar_loaded_entries(inst.rho, inst.l, lambda);
    off / diag
}

/// Sum rate of the all-ones weighted problem over `L` symmetric sources
/// with cap `dsum` on `E[(1^T y - estimate)^2]`, via the scalar CEO
/// reduction: every agent sees `x ~ N(0, rho)` through independent
/// unit-total-variance noise, `E[x | y] = w 1^T y`, and symmetry collapses
/// the per-agent quantization rates to a single scalar.
pub fn one_sum_rate(rho: f64, l: usize, dsum: f64) -> f64 {
    let lf = l as f64;
    let snr = rho / (1.0 - rho);
    let denom = 1.0 - rho + rho * lf;
    let gamma_n = (1.0 - rho) / denom;
    let d_n = rho * dsum / (denom * denom);
    let k = 1.0 / (d_n + gamma_n);
    if k <= 1.0 {
        return 0.0;
    }
    let t = (1.0 + lf * snr - k) / (lf * snr);
    debug_assert!(t > 0.0 && t < 1.0);
    let r = -0.5 * t.log2();
    0.5 * k.log2() + lf * r
}

/// Cooperative bound at error correlation `theta` for equal diagonals `d`.
pub fn symmetric_r_coop(inst: &SymmetricInstance, theta: f64) -> f64 {
    let lf = inst.l as f64;
    let det_d = inst.d.powi(inst.l as i32)
        * (1.0 - theta).powi(inst.l as i32 - 1)
        * (1.0 + (lf - 1.0) * theta);
    half_log2_plus(inst.covariance_det() / det_d)
}

/// Min-max profile over the error correlation for the symmetric instance;
/// the grid covers `(-1/(L-1), 1)` and the analytic crossing is appended.
pub fn symmetric_minimax_profile(inst: &SymmetricInstance, n_grid: usize) -> Result<MinimaxProfile> {
    if n_grid < 3 {
        return Err(Error::InvalidGrid {
            min: 3,
            got: n_grid,
        });
    }
    let lf = inst.l as f64;
    const EPS: f64 = 1e-6;
    let ts = symmetric_theta(inst);
    let mut grid = linspace(-1.0 / (lf - 1.0) + EPS, 1.0 - EPS, n_grid);
    grid.push(ts);
    grid.sort_by(|a, b| a.total_cmp(b));

    let mut coop = Vec::with_capacity(grid.len());
    let mut sum = Vec::with_capacity(grid.len());
    for &t in &grid {
        coop.push(symmetric_r_coop(inst, t));
        let dsum = inst.d * lf * (1.0 + (lf - 1.0) * t);
        sum.push(one_sum_rate(inst.rho, inst.l, dsum));
    }
    let value = coop
        .iter()
        .zip(&sum)
        .map(|(c, s)| c.max(*s))
        .fold(f64::INFINITY, f64::min);
    Ok(MinimaxProfile {
        theta_grid: grid,
        coop,
        sum,
        theta_star: ts,
        value,
    })
}
