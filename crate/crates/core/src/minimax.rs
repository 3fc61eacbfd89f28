//! The converse machinery: the cooperative bound over error covariances
//! with prescribed diagonal, the weighted-sum bound as a function of the
//! error correlation, and their min-max crossing, which pins the optimal
//! sum rate from below.

use serde::{Deserialize, Serialize};

use crate::ceo::{musum_sum_rate, MuSpec};
use crate::error::{Error, Result};
use crate::model::ErrorCov;
use crate::numeric::{half_log2_plus, linspace};
use crate::test_channel::theta_star;
use crate::two_encoder::in_diag_dg;

/// Grid evaluation of the two converse bounds over the error correlation,
/// with the analytic crossing point appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxProfile {
    pub theta_grid: Vec<f64>,
    pub coop: Vec<f64>,
    pub sum: Vec<f64>,
    /// Analytic crossing of the two curves.
    pub theta_star: f64,
    /// `min over the grid of max(coop, sum)`; equals the crossing value.
    pub value: f64,
}

/// Rate needed by a single centralized encoder to reach the error
/// covariance with diagonal `(d1, d2)` and correlation `theta`:
/// `0.5 log2+[(1 - rho^2) / ((1 - theta^2) d1 d2)]`.
pub fn r_coop(theta: f64, d1: f64, d2: f64, rho: f64) -> Result<f64> {
    if !(theta > -1.0 && theta < 1.0) {
        return Err(Error::InvalidTheta { theta });
    }
    Ok(half_log2_plus(
        (1.0 - rho * rho) / ((1.0 - theta * theta) * d1 * d2),
    ))
}

/// The weighted-sum converse: the sum rate of the `(sqrt(d2), sqrt(d1))`
/// problem whose cap is the weighted distortion attained at correlation
/// `theta`, namely `2 d1 d2 (1 + theta)`. Nonincreasing in `theta`.
pub fn r_sum_curve(theta: f64, d1: f64, d2: f64, rho: f64) -> Result<f64> {
    if !(theta > -1.0 && theta < 1.0) {
        return Err(Error::InvalidTheta { theta });
    }
    let cap = 2.0 * d1 * d2 * (1.0 + theta);
    let spec = MuSpec::new(d2.sqrt(), d1.sqrt(), cap)?;
    musum_sum_rate(&spec, rho)
}

/// Evaluates both bounds on a uniform grid over `(-1, 1)` (clipped by
/// `1e-6` at the endpoints) plus the analytic crossing point.
pub fn minimax_profile(d1: f64, d2: f64, rho: f64, n_grid: usize) -> Result<MinimaxProfile> {
    if n_grid < 3 {
        return Err(Error::InvalidGrid {
            min: 3,
            got: n_grid,
        });
    }
    if !in_diag_dg(d1, d2, rho) {
        return Err(Error::OutsideDiagDg { d1, d2 });
    }
    let ts = theta_star(d1, d2, rho)?;
    const EPS: f64 = 1e-6;
    let mut grid = linspace(-1.0 + EPS, 1.0 - EPS, n_grid);
    grid.push(ts);
    grid.sort_by(|a, b| a.total_cmp(b));

    let mut coop = Vec::with_capacity(grid.len());
    let mut sum = Vec::with_capacity(grid.len());
    for &t in &grid {
        coop.push(r_coop(t, d1, d2, rho)?);
        sum.push(r_sum_curve(t, d1, d2, rho)?);
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

/// Lower bound on the sum rate of any code whose error covariance is
/// `achieved`, against targets `(d1, d2)`: project the achieved
/// correlation onto the target diagonal and take the better of the two
/// converse bounds there.
pub fn composite_bound(achieved: &ErrorCov, d1: f64, d2: f64, rho: f64) -> Result<f64> {
    let m = achieved.matrix2()?;
    let (h1, h2) = (m.m11, m.m22);
    for (hat, target) in [(h1, d1), (h2, d2)] {
        if hat > target + 1e-12 {
            return Err(Error::DistortionExceedsTarget {
                achieved: hat,
                target,
            });
        }
    }
    let phi = achieved.theta() * (h1 * h2 / (d1 * d2)).sqrt();
    Ok(r_coop(phi, d1, d2, rho)?.max(r_sum_curve(phi, d1, d2, rho)?))
}
